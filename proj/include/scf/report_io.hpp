#pragma once

// Structured output for analysis reports. Resource indices in documents are
// 1-based to match the s1..sn column names used everywhere else.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scf/classification.hpp"
#include "scf/config_io.hpp"

namespace scf {

using Json = nlohmann::ordered_json;

namespace report_detail {

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
Json optional_or_null(const std::optional<T>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

inline Json vector_json(const Vec& v)
{
    Json a = Json::array();
    for (double x : v)
        a.push_back(number_or_null(x));
    return a;
}

inline Json region_json(const RegionVerdict& r)
{
    Json j;
    j["region"] = std::string(to_string(r.region));
    j["index"] = r.index + 1;
    j["value"] = r.value;
    j["vbar"] = number_or_null(r.vbar);
    return j;
}

inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out)
{
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten(j[i], prefix + "." + std::to_string(i + 1), out);
    } else if (j.is_null()) {
        out.emplace_back(prefix, "");
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else if (j.is_boolean()) {
        out.emplace_back(prefix, j.get<bool>() ? "true" : "false");
    } else if (j.is_number_float()) {
        out.emplace_back(prefix, format_number(j.get<double>()));
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

} // namespace report_detail

inline Json to_json(const AnalysisReport& rep)
{
    using namespace report_detail;
    Json j;
    j["vbar"] = vector_json(rep.vbar);
    j["region_of_input"] = region_json(rep.region_of_input);
    j["mu_r"] = optional_or_null(rep.mu_r);
    if (rep.r_star)
        j["r_star"] = *rep.r_star;
    else if (rep.r_star_none)
        j["r_star"] = "none";
    else
        j["r_star"] = nullptr;
    j["sigma"] = optional_or_null(rep.sigma);
    j["rho"] = optional_or_null(rep.rho);
    j["rho_equals_sigma"] = rep.rho_equals_sigma;
    j["s_hat_plus"] = rep.s_hat_plus ? vector_json(*rep.s_hat_plus) : Json(nullptr);
    j["periodic_x_post"] = optional_or_null(rep.periodic_x_post);
    j["periodic_x_pre"] = optional_or_null(rep.periodic_x_pre);
    j["periodic_cycle_time"] = optional_or_null(rep.periodic_cycle_time);
    j["s0"] = vector_json(rep.s0);
    j["x0"] = optional_or_null(rep.x0);
    j["region_of_initial"] = rep.region_of_initial ? region_json(*rep.region_of_initial) : Json(nullptr);
    j["n_rho"] = optional_or_null(rep.n_rho);
    j["n_bar"] = optional_or_null(rep.n_bar);
    j["x_threshold"] = optional_or_null(rep.x_threshold);
    j["x_threshold_terms"] = vector_json(rep.x_threshold_terms);
    j["verdict"] = std::string(to_string(rep.verdict));
    return j;
}

/// Dotted-path key/value pairs; arrays are indexed from 1.
inline std::vector<std::pair<std::string, std::string>> flatten(const Json& j)
{
    std::vector<std::pair<std::string, std::string>> out;
    report_detail::flatten(j, "", out);
    return out;
}

} // namespace scf
