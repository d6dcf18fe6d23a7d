// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_STATES_HPP
#define QSPECKLE_STATES_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qspeckle/spectrum.hpp"

namespace qspeckle {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// One correlated mode pair (q_m, -q_m), realized as a plain index pair.
// No geometric meaning is attached to the indices.
struct ModePair {
    int plus;
    int minus;
};

inline void validate_pairing(std::span<const ModePair> pairing, int dim)
{
    if (2 * static_cast<int>(pairing.size()) > dim)
        throw std::invalid_argument("pairing needs 2M <= dim modes");
    std::vector<char> seen(static_cast<std::size_t>(dim), 0);
    for (const auto& p : pairing) {
        if (p.plus < 0 || p.plus >= dim || p.minus < 0 || p.minus >= dim)
            throw std::invalid_argument("pairing index out of range");
        if (p.plus == p.minus)
            throw std::invalid_argument("pair must join two distinct modes");
        if (seen[p.plus] || seen[p.minus])
            throw std::invalid_argument("duplicate mode index in pairing");
        seen[p.plus] = seen[p.minus] = 1;
    }
}

inline std::vector<ModePair> default_pairing(int pair_count)
{
    std::vector<ModePair> pairing;
    pairing.reserve(pair_count);
    for (int m = 0; m < pair_count; ++m) pairing.push_back({2 * m, 2 * m + 1});
    return pairing;
}

// Symmetric, unit-normalized two-photon amplitude matrix of a pure state.
// Nonzero entries are cached as triplets so that bilinear forms over sparse
// amplitude patterns (the usual pair-correlated states) cost O(nnz), not
// O(dim^2).
class CoefficientMatrix {
  public:
    struct Triplet {
        int row;
        int col;
        std::complex<double> value;
    };

    static constexpr double kNormTol = 1e-12;
    static constexpr double kSymmetryTol = 1e-12;

    explicit CoefficientMatrix(ComplexMatrix entries)
        : entries_(std::move(entries))
    {
        if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
            throw std::invalid_argument("coefficient matrix must be square");
        const double scale = entries_.norm();
        if ((entries_ - entries_.transpose()).norm() > kSymmetryTol * std::max(1.0, scale))
            throw std::invalid_argument("coefficient matrix must be symmetric");
        if (std::abs(entries_.squaredNorm() - 1.0) > kNormTol)
            throw std::invalid_argument("coefficient matrix must have Tr(c c^dag) = 1");
        cache_nonzeros();
    }

    // Symmetrize (c + c^T)/2 and renormalize; rejects amplitude matrices
    // whose symmetric part vanishes.
    static CoefficientMatrix symmetrized(const ComplexMatrix& raw)
    {
        if (raw.rows() != raw.cols() || raw.rows() < 1)
            throw std::invalid_argument("coefficient matrix must be square");
        ComplexMatrix c = 0.5 * (raw + raw.transpose().eval());
        const double norm = c.norm();
        if (norm <= 1e-14 * std::max(1.0, raw.norm()))
            throw std::invalid_argument("amplitude matrix is zero after symmetrization");
        c /= norm;
        return CoefficientMatrix(std::move(c));
    }

    int dim() const { return static_cast<int>(entries_.rows()); }
    const ComplexMatrix& entries() const { return entries_; }
    std::span<const Triplet> nonzeros() const { return nonzeros_; }

    bool is_sparse() const
    {
        return 4 * nonzeros_.size() < static_cast<std::size_t>(dim()) * dim();
    }

  private:
    void cache_nonzeros()
    {
        for (int col = 0; col < entries_.cols(); ++col)
            for (int row = 0; row < entries_.rows(); ++row)
                if (entries_(row, col) != std::complex<double>(0.0, 0.0))
                    nonzeros_.push_back({row, col, entries_(row, col)});
    }

    ComplexMatrix entries_;
    std::vector<Triplet> nonzeros_;
};

// Reduced single-photon density matrix: Hermitian, unit trace, positive
// semidefinite.  The eigenvalue spectrum is computed once at construction.
class ReducedDensity {
  public:
    static constexpr double kHermitianTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kPsdTol = 1e-12;

    explicit ReducedDensity(ComplexMatrix entries) : entries_(std::move(entries))
    {
        if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
            throw std::invalid_argument("reduced density matrix must be square");
        if ((entries_ - entries_.adjoint().eval()).norm() > kHermitianTol)
            throw std::invalid_argument("reduced density matrix must be Hermitian");
        if (std::abs(entries_.trace().real() - 1.0) > kTraceTol ||
            std::abs(entries_.trace().imag()) > kTraceTol)
            throw std::invalid_argument("reduced density matrix must have unit trace");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(entries_);
        eigenvalues_.assign(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
        if (!eigenvalues_.empty() && eigenvalues_.front() < -kPsdTol)
            throw std::invalid_argument("reduced density matrix must be positive semidefinite");
        diagonal_ = entries_.diagonal().real();
        is_diagonal_ =
            (entries_ - ComplexMatrix(diagonal_.cast<std::complex<double>>().asDiagonal()))
                .cwiseAbs()
                .maxCoeff() == 0.0;
    }

    int dim() const { return static_cast<int>(entries_.rows()); }
    const ComplexMatrix& entries() const { return entries_; }

    // Eigenvalues in ascending order.
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }

    double purity() const
    {
        double sum = 0.0;
        for (double g : eigenvalues_) sum += g * g;
        return sum;
    }

    bool is_diagonal() const { return is_diagonal_; }
    const Eigen::VectorXd& diagonal() const { return diagonal_; }

  private:
    ComplexMatrix entries_;
    std::vector<double> eigenvalues_;
    Eigen::VectorXd diagonal_;
    bool is_diagonal_ = false;
};

// A two-photon density operator as a weighted mixture of pure components
// rho = sum_j p_j c_j (x) c_j^*.  The dense dim^2 x dim^2 form is never
// materialized.
class StateEnsemble {
  public:
    struct Component {
        double weight;
        CoefficientMatrix amplitude;
    };

    static constexpr double kWeightFloor = 1e-12;
    static constexpr double kWeightSumTol = 1e-12;

    StateEnsemble(int dim, std::vector<Component> components)
        : dim_(dim), components_(std::move(components))
    {
        if (components_.empty())
            throw std::invalid_argument("state ensemble needs at least one component");
        double total = 0.0;
        for (const auto& comp : components_) {
            if (comp.weight < kWeightFloor)
                throw std::invalid_argument("component weights must exceed 1e-12");
            if (comp.amplitude.dim() != dim_)
                throw std::invalid_argument("component dimension mismatch");
            total += comp.weight;
        }
        if (std::abs(total - 1.0) > kWeightSumTol)
            throw std::invalid_argument("component weights must sum to 1");
    }

    int dim() const { return dim_; }
    std::span<const Component> components() const { return components_; }
    bool is_pure() const { return components_.size() == 1; }

  private:
    int dim_;
    std::vector<Component> components_;
};

// Maximally entangled Schmidt-rank-M pure state: amplitude 1/sqrt(2M) on
// (q_m, -q_m) and (-q_m, q_m) for each pair.
inline StateEnsemble make_pure_entangled(std::span<const ModePair> pairing, int dim)
{
    if (pairing.empty()) throw std::invalid_argument("need at least one mode pair");
    validate_pairing(pairing, dim);
    const double amp = 1.0 / std::sqrt(2.0 * static_cast<double>(pairing.size()));
    ComplexMatrix c = ComplexMatrix::Zero(dim, dim);
    for (const auto& p : pairing) {
        c(p.plus, p.minus) = amp;
        c(p.minus, p.plus) = amp;
    }
    std::vector<StateEnsemble::Component> comps;
    comps.push_back({1.0, CoefficientMatrix(std::move(c))});
    return StateEnsemble(dim, std::move(comps));
}

inline StateEnsemble make_pure_entangled(int pair_count, int dim = -1)
{
    if (pair_count < 1) throw std::invalid_argument("need at least one mode pair");
    if (dim < 0) dim = 2 * pair_count;
    const auto pairing = default_pairing(pair_count);
    return make_pure_entangled(std::span<const ModePair>(pairing), dim);
}

// Classical counterpart: equal-weight mixture of the M single-pair states.
inline StateEnsemble make_fully_mixed(std::span<const ModePair> pairing, int dim)
{
    if (pairing.empty()) throw std::invalid_argument("need at least one mode pair");
    validate_pairing(pairing, dim);
    const double weight = 1.0 / static_cast<double>(pairing.size());
    const double amp = 1.0 / std::sqrt(2.0);
    std::vector<StateEnsemble::Component> comps;
    comps.reserve(pairing.size());
    for (const auto& p : pairing) {
        ComplexMatrix c = ComplexMatrix::Zero(dim, dim);
        c(p.plus, p.minus) = amp;
        c(p.minus, p.plus) = amp;
        comps.push_back({weight, CoefficientMatrix(std::move(c))});
    }
    return StateEnsemble(dim, std::move(comps));
}

inline StateEnsemble make_fully_mixed(int pair_count, int dim = -1)
{
    if (pair_count < 1) throw std::invalid_argument("need at least one mode pair");
    if (dim < 0) dim = 2 * pair_count;
    const auto pairing = default_pairing(pair_count);
    return make_fully_mixed(std::span<const ModePair>(pairing), dim);
}

// Pure state from an arbitrary amplitude matrix: symmetrize, renormalize.
inline StateEnsemble make_general_pure(const ComplexMatrix& raw)
{
    auto c = CoefficientMatrix::symmetrized(raw);
    const int dim = c.dim();
    std::vector<StateEnsemble::Component> comps;
    comps.push_back({1.0, std::move(c)});
    return StateEnsemble(dim, std::move(comps));
}

// Tr rho^2 without forming rho: sum_{j,j'} p_j p_j' |Tr(c_j c_j'^dag)|^2.
inline double purity(const StateEnsemble& state)
{
    const auto comps = state.components();
    double total = 0.0;
    for (std::size_t j = 0; j < comps.size(); ++j) {
        total += comps[j].weight * comps[j].weight;  // |Tr c c^dag|^2 = 1
        for (std::size_t l = j + 1; l < comps.size(); ++l) {
            const std::complex<double> overlap =
                (comps[j].amplitude.entries().array() *
                 comps[l].amplitude.entries().array().conjugate())
                    .sum();
            total += 2.0 * comps[j].weight * comps[l].weight * std::norm(overlap);
        }
    }
    return total;
}

// rho^(1) = sum_j p_j c_j c_j^dag.
inline ReducedDensity reduced_density(const StateEnsemble& state)
{
    ComplexMatrix rho1 = ComplexMatrix::Zero(state.dim(), state.dim());
    for (const auto& comp : state.components())
        rho1 += comp.weight * (comp.amplitude.entries() * comp.amplitude.entries().adjoint());
    // Numerical symmetrization keeps the Hermiticity validation meaningful.
    rho1 = 0.5 * (rho1 + rho1.adjoint().eval());
    return ReducedDensity(std::move(rho1));
}

// Group the eigenvalues of rho^(1) into (gamma_m, mu_m) clusters.  Eigenvalues
// below 1e-12 are dropped; consecutive values whose relative gap is below
// degeneracy_tol share a cluster.
inline SchmidtSpectrum schmidt_spectrum(const ReducedDensity& rho1,
                                        double degeneracy_tol = 1e-9)
{
    if (!(degeneracy_tol > 0.0))
        throw std::invalid_argument("degeneracy tolerance must be positive");
    std::vector<double> values(rho1.eigenvalues().rbegin(), rho1.eigenvalues().rend());
    SchmidtSpectrum spectrum;
    std::size_t i = 0;
    while (i < values.size() && values[i] > 1e-12) {
        double sum = values[i];
        int count = 1;
        while (i + count < values.size() && values[i + count] > 1e-12) {
            const double gap = (values[i + count - 1] - values[i + count]) / values[i];
            if (gap >= degeneracy_tol) {
                if (gap < 10.0 * degeneracy_tol) spectrum.ambiguous_clustering = true;
                break;
            }
            sum += values[i + count];
            ++count;
        }
        spectrum.clusters.push_back({sum / count, count});
        i += count;
    }
    return spectrum;
}

}  // namespace qspeckle

#endif  // QSPECKLE_STATES_HPP
