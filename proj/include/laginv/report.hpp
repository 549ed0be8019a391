#pragma once

// JSON and CSV serialisation of the engine results. Field names are part of
// the output contract (docs/formats.md). Non-finite numbers become JSON null.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "laginv/diagnostics.hpp"
#include "laginv/error.hpp"
#include "laginv/inversion.hpp"
#include "laginv/laguerre.hpp"
#include "laginv/monte_carlo.hpp"
#include "laginv/umvue.hpp"

namespace laginv {

using json = nlohmann::ordered_json;

// 17 significant digits, '.' separator, independent of the C locale.
inline std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v == 0.0 ? 0.0 : v) : json(nullptr); }

inline json numbers(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v)
        arr.push_back(number_or_null(x));
    return arr;
}

inline json to_json(const decay_class& d) {
    json j{{"kind", std::string(to_string(d.kind))}};
    if (d.kind == decay_kind::geometric)
        j["rate"] = d.rate;
    else if (d.kind == decay_kind::polynomial)
        j["exponent"] = d.exponent;
    return j;
}

inline json to_json(const coeff_diagnostics& d) {
    return {{"coeffs", numbers(d.coeffs)},
            {"sumSquares", number_or_null(d.sum_squares)},
            {"decayClass", to_json(d.decay)},
            {"tailEstimate", number_or_null(d.tail_estimate)},
            {"verdict", std::string(to_string(d.status))}};
}

inline json to_json(const inversion_params& p) {
    json j = json::object();
    if (p.N)
        j["N"] = *p.N;
    if (p.lambda0)
        j["lambda0"] = *p.lambda0;
    if (p.gamma)
        j["gamma"] = *p.gamma;
    if (p.T)
        j["T"] = *p.T;
    if (p.tol)
        j["tol"] = *p.tol;
    return j;
}

inline json to_json(const inversion_report& r) {
    json j{{"xs", numbers(r.xs)},
           {"values", numbers(r.values)},
           {"method", std::string(to_string(r.method))},
           {"params", to_json(r.params)}};
    j["diagnostics"] = r.diagnostics ? to_json(*r.diagnostics) : json(nullptr);
    return j;
}

inline std::string to_csv(const inversion_report& r) {
    std::string out = "x,value\n";
    for (std::size_t i = 0; i < r.xs.size(); ++i)
        out += format_number(r.xs[i]) + "," + format_number(r.values[i]) + "\n";
    return out;
}

struct umvue_report {
    double a;
    std::size_t n;
    double lambda;
    beta_coeffs beta;
    double variance_partial;
    double variance_tail;
    double cr_bound;
    std::optional<estimator_series> estimator;
    std::vector<double> xs;
    std::vector<double> estimates;
};

inline umvue_report make_umvue_report(const estimation_problem& p, double lambda, double lambda0, std::size_t M,
                                      const std::vector<double>& xs = {}) {
    umvue_report r{p.a, p.sample_size.value_or(1), lambda, beta_simple(p, lambda, M), 0.0, 0.0, 0.0, {}, xs, {}};
    r.variance_partial = sum_of_squares(r.beta.values) -
                         (r.beta.values.empty() ? 0.0 : r.beta.values[0] * r.beta.values[0]);
    r.variance_tail = r.beta.diagnostics.tail_estimate;
    r.cr_bound = cr_bound(p, lambda);
    if (!xs.empty()) {
        validate_grid(xs);
        r.estimator = build_umvue(p, lambda0, M, true);
        for (double x : xs)
            r.estimates.push_back((*r.estimator)(x));
    }
    return r;
}

inline json to_json(const umvue_report& r) {
    json j{{"a", r.a},
           {"n", r.n},
           {"lambda", r.lambda},
           {"beta", numbers(r.beta.values)},
           {"variance", {{"partial", number_or_null(r.variance_partial)}, {"tail", number_or_null(r.variance_tail)}}},
           {"cr_bound", number_or_null(r.cr_bound)},
           {"verdict", std::string(to_string(r.beta.diagnostics.status))}};
    if (r.estimator) {
        j["estimator"] = {{"lambda0", r.estimator->lambda0},
                          {"order", r.estimator->order()},
                          {"coeffs", numbers(r.estimator->coeffs)},
                          {"xs", numbers(r.xs)},
                          {"values", numbers(r.estimates)}};
    }
    return j;
}

inline std::string to_csv(const umvue_report& r) {
    std::string out = "n,beta\n";
    for (std::size_t i = 0; i < r.beta.values.size(); ++i)
        out += std::to_string(i) + "," + format_number(r.beta.values[i]) + "\n";
    return out;
}

struct check_row {
    double lambda;
    coeff_diagnostics diagnostics;
};

struct check_report {
    double a;
    std::size_t M;
    std::vector<check_row> rows;
    verdict overall = verdict::converges;
};

// Diagnostics of the beta sequence over a grid of rates; the overall verdict
// is the worst one seen.
inline check_report run_check(const estimation_problem& p, const std::vector<double>& lambdas, std::size_t M) {
    validate_grid(lambdas);
    check_report r{p.a, M, {}, verdict::converges};
    for (double l : lambdas) {
        coeff_diagnostics d;
        try {
            d = beta_simple(p, l, M).diagnostics;
        } catch (const singularity_error&) {
            d = detail::failed({}, decay_kind::diverging);
        }
        r.overall = worst(r.overall, d.status);
        r.rows.push_back({l, std::move(d)});
    }
    return r;
}

inline json to_json(const check_report& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"lambda", row.lambda},
                        {"sumSquares", number_or_null(row.diagnostics.sum_squares)},
                        {"decayClass", to_json(row.diagnostics.decay)},
                        {"tailEstimate", number_or_null(row.diagnostics.tail_estimate)},
                        {"verdict", std::string(to_string(row.diagnostics.status))}});
    }
    return {{"a", r.a}, {"M", r.M}, {"grid", std::move(rows)}, {"verdict", std::string(to_string(r.overall))}};
}

inline std::string to_csv(const check_report& r) {
    std::string out = "lambda,sum_squares,decay,tail_estimate,verdict\n";
    for (const auto& row : r.rows)
        out += format_number(row.lambda) + "," + format_number(row.diagnostics.sum_squares) + "," +
               std::string(to_string(row.diagnostics.decay.kind)) + "," +
               format_number(row.diagnostics.tail_estimate) + "," + std::string(to_string(row.diagnostics.status)) +
               "\n";
    return out;
}

inline json to_json(const mc_report& r) {
    return {{"empiricalMean", number_or_null(r.empirical_mean)},
            {"empiricalVar", number_or_null(r.empirical_var)},
            {"stdError", number_or_null(r.std_error)},
            {"theoreticalValue", number_or_null(r.theoretical_value)},
            {"varianceSeriesValue", number_or_null(r.variance_series_value)},
            {"crBound", number_or_null(r.cr_bound)},
            {"zScore", number_or_null(r.z_score)},
            {"reps", r.reps}};
}

inline std::string to_csv(const mc_report& r) {
    return "empirical_mean,empirical_var,std_error,theoretical_value,variance_series_value,cr_bound,z_score,reps\n" +
           format_number(r.empirical_mean) + "," + format_number(r.empirical_var) + "," + format_number(r.std_error) +
           "," + format_number(r.theoretical_value) + "," + format_number(r.variance_series_value) + "," +
           format_number(r.cr_bound) + "," + format_number(r.z_score) + "," + std::to_string(r.reps) + "\n";
}

// Human-readable polynomial with the variable x, highest power first.
inline std::string poly_text(std::span<const double> c) {
    std::string out;
    for (std::size_t i = c.size(); i-- > 0;) {
        const double v = c[i];
        if (v == 0.0 && !(i == 0 && out.empty()))
            continue;
        const double mag = std::abs(v);
        if (out.empty())
            out += v < 0 ? "-" : "";
        else
            out += v < 0 ? " - " : " + ";
        const bool unit = mag == 1.0 && i > 0;
        if (!unit)
            out += format_number(mag);
        if (i > 0) {
            out += unit ? "x" : "*x";
            if (i > 1)
                out += "^" + std::to_string(i);
        }
    }
    return out;
}

inline json to_json(const ortho_basis& b) {
    json polys = json::array();
    for (std::size_t n = 0; n <= b.table_degree(); ++n) {
        const auto c = b.coefficients(n);
        polys.push_back({{"n", n}, {"coeffs", numbers({c.begin(), c.end()})}, {"text", poly_text(c)}});
    }
    return {{"a", b.shape()}, {"maxDegree", b.max_degree()}, {"polynomials", std::move(polys)}};
}

inline std::string to_csv(const ortho_basis& b) {
    std::string out = "n,k,coeff\n";
    for (std::size_t n = 0; n <= b.table_degree(); ++n) {
        const auto c = b.coefficients(n);
        for (std::size_t k = 0; k < c.size(); ++k)
            out += std::to_string(n) + "," + std::to_string(k) + "," + format_number(c[k]) + "\n";
    }
    return out;
}

inline json to_json(const std::vector<comparison_row>& rows, const std::vector<double>& xs) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"method", std::string(to_string(r.method))},
                       {"N", r.N},
                       {"values", numbers(r.values)},
                       {"errors", numbers(r.errors)},
                       {"maxAbsError", number_or_null(r.max_abs_error)}});
    return {{"xs", numbers(xs)}, {"rows", std::move(out)}};
}

inline std::string to_csv(const std::vector<comparison_row>& rows) {
    std::string out = "method,N,max_abs_error\n";
    for (const auto& r : rows)
        out += std::string(to_string(r.method)) + "," + std::to_string(r.N) + "," + format_number(r.max_abs_error) +
               "\n";
    return out;
}

inline json error_envelope(const std::string& stage, const std::string& message,
                           std::optional<std::size_t> position = std::nullopt) {
    json j{{"stage", stage}, {"message", message}};
    if (position)
        j["position"] = *position;
    return j;
}

} // namespace laginv
