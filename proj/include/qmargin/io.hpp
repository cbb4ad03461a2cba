// State and observable file I/O. Text-based JSON payloads, round-trip exact
// (shortest round-trip decimal serialization of doubles).

#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qmargin/complex_matrix.hpp"
#include "qmargin/measurement.hpp"
#include "qmargin/states.hpp"

namespace qmargin {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline nlohmann::json entries_to_json(const ComplexMatrix& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (cxd z : m.data()) arr.push_back({z.real(), z.imag()});
    return arr;
}

inline std::vector<cxd> entries_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw IoError("state file: matrix payload must be an array");
    std::vector<cxd> out;
    out.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw IoError("state file: entries must be [re, im] pairs");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace detail

inline void write_density(const std::string& path, const DensityOperator& rho) {
    nlohmann::json j;
    j["kind"] = "density";
    j["dims"] = rho.factorization.dims;
    j["matrix"] = detail::entries_to_json(rho.matrix);
    detail::save_json(path, j);
}

inline void write_ket(const std::string& path, const Ket& k) {
    nlohmann::json j;
    j["kind"] = "ket";
    j["dims"] = k.factorization.dims;
    j["vector"] = detail::entries_to_json(k.vector);
    detail::save_json(path, j);
}

// Loads either kind; kets are promoted to pure density operators.
inline DensityOperator read_density(const std::string& path, double tol = 1e-8) {
    const nlohmann::json j = detail::load_json(path);
    if (!j.contains("dims") || !j["dims"].is_array())
        throw IoError("state file: missing dims array");
    std::vector<std::size_t> dims;
    for (const auto& d : j["dims"]) {
        if (!d.is_number_unsigned() || d.get<std::size_t>() < 2)
            throw IoError("state file: dims must be integers >= 2");
        dims.push_back(d.get<std::size_t>());
    }
    TensorFactorization fact(dims);
    const std::string kind = j.value("kind", "density");

    try {
        if (kind == "ket") {
            auto entries = detail::entries_from_json(j.at("vector"));
            const std::size_t len = entries.size();
            if (len != fact.total_dim())
                throw IoError("state file: vector length does not match dims");
            return from_pure(Ket(fact, ComplexMatrix(len, 1, std::move(entries))));
        }
        if (kind != "density") throw IoError("state file: unknown kind tag");
        auto entries = detail::entries_from_json(j.at("matrix"));
        const std::size_t d = fact.total_dim();
        if (entries.size() != d * d)
            throw IoError("state file: matrix length does not match dims");
        DensityOperator rho(fact, ComplexMatrix(d, d, std::move(entries)));
        const ValidationReport rep = validate_density(rho, tol);
        if (!rep.pass())
            throw IoError("state file: payload fails density validation (hermitian=" +
                          std::to_string(rep.hermitian) + " psd=" + std::to_string(rep.psd) +
                          " unit_trace=" + std::to_string(rep.unit_trace) + ")");
        return rho;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("state file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("state file: ") + e.what());
    }
}

inline void write_observable(const std::string& path, const ComplexMatrix& m) {
    nlohmann::json j;
    j["kind"] = "observable";
    j["dim"] = m.rows();
    j["matrix"] = detail::entries_to_json(m);
    detail::save_json(path, j);
}

inline Observable read_observable(const std::string& path,
                                  double tol_degeneracy = kDefaultDegeneracyTol) {
    const nlohmann::json j = detail::load_json(path);
    try {
        const std::size_t d = j.at("dim").get<std::size_t>();
        auto entries = detail::entries_from_json(j.at("matrix"));
        if (entries.size() != d * d)
            throw IoError("observable file: matrix length does not match dim");
        return observable_from_matrix(ComplexMatrix(d, d, std::move(entries)), tol_degeneracy);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("observable file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("observable file: ") + e.what());
    }
}

}  // namespace qmargin
