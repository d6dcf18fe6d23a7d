// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_STATE_IO_HPP
#define QSPECKLE_STATE_IO_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspeckle/states.hpp"

// JSON descriptions of two-photon states.  Three accepted forms:
//   { "pure_entangled": { "M": m, "dim"?: d } }
//   { "fully_mixed":    { "M": m, "dim"?: d } }
//   { "dim": d, "components": [ { "weight": p,
//                                 "entries": [[row, col, re, im], ...] } ] }
// The shorthand forms pair modes (2i, 2i+1) and default to dim = 2M.

namespace qspeckle {

inline StateEnsemble state_from_json(const nlohmann::json& j, int default_dim = -1)
{
    if (!j.is_object()) throw std::invalid_argument("state description must be an object");
    auto shorthand_args = [&](const nlohmann::json& args) {
        if (!args.is_object() || !args.contains("M"))
            throw std::invalid_argument("state shorthand needs an object with \"M\"");
        const int m = args.at("M").get<int>();
        int dim = args.value("dim", default_dim);
        if (dim < 0) dim = 2 * m;
        return std::pair{m, dim};
    };
    if (j.contains("pure_entangled")) {
        const auto [m, dim] = shorthand_args(j.at("pure_entangled"));
        return make_pure_entangled(m, dim);
    }
    if (j.contains("fully_mixed")) {
        const auto [m, dim] = shorthand_args(j.at("fully_mixed"));
        return make_fully_mixed(m, dim);
    }
    if (!j.contains("dim") || !j.contains("components"))
        throw std::invalid_argument("state description needs \"dim\" and \"components\"");
    const int dim = j.at("dim").get<int>();
    if (dim < 1) throw std::invalid_argument("state dimension must be >= 1");
    std::vector<StateEnsemble::Component> components;
    for (const auto& comp : j.at("components")) {
        const double weight = comp.at("weight").get<double>();
        ComplexMatrix c = ComplexMatrix::Zero(dim, dim);
        for (const auto& entry : comp.at("entries")) {
            if (!entry.is_array() || entry.size() != 4)
                throw std::invalid_argument("state entry must be [row, col, re, im]");
            const int row = entry[0].get<int>();
            const int col = entry[1].get<int>();
            if (row < 0 || row >= dim || col < 0 || col >= dim)
                throw std::invalid_argument("state entry index out of range");
            c(row, col) = {entry[2].get<double>(), entry[3].get<double>()};
        }
        components.push_back({weight, CoefficientMatrix(std::move(c))});
    }
    return StateEnsemble(dim, std::move(components));
}

inline nlohmann::json state_to_json(const StateEnsemble& state)
{
    nlohmann::json j;
    j["dim"] = state.dim();
    auto& components = j["components"] = nlohmann::json::array();
    for (const auto& comp : state.components()) {
        nlohmann::json c;
        c["weight"] = comp.weight;
        auto& entries = c["entries"] = nlohmann::json::array();
        for (const auto& t : comp.amplitude.nonzeros())
            entries.push_back({t.row, t.col, t.value.real(), t.value.imag()});
        components.push_back(std::move(c));
    }
    return j;
}

}  // namespace qspeckle

#endif  // QSPECKLE_STATE_IO_HPP
