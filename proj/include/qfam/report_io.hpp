#pragma once

// Deterministic text serialization of the report types. All floating-point
// values are printed with %.17g so emitted numbers round-trip exactly and
// identical runs produce byte-identical artifacts; JSON keys appear in a
// fixed documented order for the same reason.

#include <cstdio>
#include <string>
#include <vector>

#include "qfam/characterization.hpp"
#include "qfam/simulation.hpp"

namespace qfam {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void append_json_array(std::string& out, const char* key,
                              const std::vector<double>& values) {
    out += '"';
    out += key;
    out += "\":[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    out += ']';
}

inline void append_json_array(std::string& out, const char* key,
                              const std::vector<long long>& values) {
    out += '"';
    out += key;
    out += "\":[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    out += ']';
}

}  // namespace detail

inline std::string to_json(const ResidualReport& r) {
    std::string out = "{";
    detail::append_json_array(out, "x_grid", r.x_grid);
    out += ',';
    detail::append_json_array(out, "lhs", r.lhs);
    out += ',';
    detail::append_json_array(out, "rhs", r.rhs);
    out += ',';
    detail::append_json_array(out, "delta", r.delta);
    out += ",\"max_abs_delta\":" + format_double(r.max_abs_delta);
    out += ",\"tol\":" + format_double(r.tol);
    out += ",\"passed\":";
    out += r.passed ? "true" : "false";
    out += "}\n";
    return out;
}

inline std::string to_csv(const ResidualReport& r) {
    std::string out = "x,lhs,rhs,delta\n";
    for (std::size_t i = 0; i < r.x_grid.size(); ++i) {
        out += format_double(r.x_grid[i]);
        out += ',';
        out += format_double(r.lhs[i]);
        out += ',';
        out += format_double(r.rhs[i]);
        out += ',';
        out += format_double(r.delta[i]);
        out += '\n';
    }
    return out;
}

inline std::string to_json(const RegressionEstimate& e) {
    std::string out = "{";
    detail::append_json_array(out, "bin_edges", e.bin_edges);
    out += ',';
    detail::append_json_array(out, "bin_centers", e.bin_centers);
    out += ',';
    detail::append_json_array(out, "counts", e.counts);
    out += ',';
    detail::append_json_array(out, "empirical_mean", e.empirical_mean);
    out += ',';
    detail::append_json_array(out, "std_err", e.std_err);
    out += ',';
    detail::append_json_array(out, "theoretical", e.theoretical);
    out += ',';
    detail::append_json_array(out, "z_scores", e.z_scores);
    out += "}\n";
    return out;
}

inline std::string to_csv(const RegressionEstimate& e) {
    std::string out = "bin_lo,bin_hi,bin_center,count,empirical_mean,std_err,theoretical,z_score\n";
    for (std::size_t i = 0; i < e.bin_centers.size(); ++i) {
        out += format_double(e.bin_edges[i]);
        out += ',';
        out += format_double(e.bin_edges[i + 1]);
        out += ',';
        out += format_double(e.bin_centers[i]);
        out += ',';
        out += std::to_string(e.counts[i]);
        out += ',';
        out += format_double(e.empirical_mean[i]);
        out += ',';
        out += format_double(e.std_err[i]);
        out += ',';
        out += format_double(e.theoretical[i]);
        out += ',';
        out += format_double(e.z_scores[i]);
        out += '\n';
    }
    return out;
}

inline std::string values_to_json(const std::vector<double>& values) {
    std::string out = "{";
    detail::append_json_array(out, "values", values);
    out += "}\n";
    return out;
}

inline std::string values_to_csv(const std::vector<double>& values) {
    std::string out = "value\n";
    for (double v : values) {
        out += format_double(v);
        out += '\n';
    }
    return out;
}

}  // namespace qfam
