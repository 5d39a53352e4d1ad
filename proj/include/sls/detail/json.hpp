#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sls/errors.hpp"

namespace sls::detail {

using nlohmann::json;

// Dense matrix as a row-major nested array. Empty matrices serialize as [].
inline json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw SpecError(std::string(what) + ": expected an array of rows");
    const auto n_rows = static_cast<Eigen::Index>(j.size());
    if (n_rows == 0) return Eigen::MatrixXd(0, 0);
    if (!j[0].is_array()) throw SpecError(std::string(what) + ": rows must be arrays");
    const auto n_cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != n_cols)
            throw SpecError(std::string(what) + ": ragged rows");
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            if (!j[i][c].is_number()) throw SpecError(std::string(what) + ": non-numeric entry");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Eigen::VectorXd vector_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw SpecError(std::string(what) + ": expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!j[i].is_number()) throw SpecError(std::string(what) + ": non-numeric entry");
        v(i) = j[i].get<double>();
    }
    return v;
}

}  // namespace sls::detail
