#pragma once

// Laplace inversion.
//
// Main route: with Phi(y) = lambda0/(1-y) * phi(lambda0/(1-y)) and c_n its
// Taylor coefficients at 0,
//
//   u(x) = sum_n c_n L_n(lambda0 x),   L_n(t) = sum_k (-1)^k C(n,k) t^k / k!.
//
// The partial sums are polynomials, exact as soon as N >= deg u. Three
// classical baselines sit next to it: Post-Widder, the Bromwich line
// integral and the probabilistic CDF inversion for transforms of measures.

#include <cmath>
#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laginv/diagnostics.hpp"
#include "laginv/error.hpp"
#include "laginv/expr.hpp"
#include "laginv/laguerre.hpp"
#include "laginv/numeric.hpp"
#include "laginv/power_series.hpp"
#include "laginv/quadrature.hpp"

namespace laginv {

enum class series_kind { laplace_inverse, umvue };

inline std::string_view to_string(series_kind k) {
    return k == series_kind::laplace_inverse ? "laplace_inverse" : "umvue";
}

// A truncated expansion in the orthonormal gamma basis at rate lambda0.
// For laplace_inverse the coefficients multiply L_n(lambda0 x) =
// (-1)^n q_n(lambda0 x) with shape 1; for umvue they multiply q_n(lambda0 x)
// with the given shape.
struct estimator_series {
    double lambda0 = 1.0;
    std::vector<double> coeffs;
    double shape = 1.0;
    series_kind kind = series_kind::laplace_inverse;

    std::size_t order() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }

    double operator()(double x) const {
        if (coeffs.empty())
            return 0.0;
        // Extended precision: the terms can exceed the sum by many orders
        // of magnitude (polynomial inverses, slowly decaying coefficients).
        const auto q = ortho_values<long double>(shape, order(), lambda0 * x);
        long double s = 0.0L;
        for (std::size_t n = 0; n < coeffs.size(); ++n) {
            const long double basis = (kind == series_kind::laplace_inverse && n % 2 == 1) ? -q[n] : q[n];
            s += static_cast<long double>(coeffs[n]) * basis;
        }
        return static_cast<double>(s);
    }
};

enum class inversion_method { laguerre, post_widder, bromwich, probabilistic_cdf };

inline std::string_view to_string(inversion_method m) {
    switch (m) {
    case inversion_method::laguerre:
        return "laguerre";
    case inversion_method::post_widder:
        return "post_widder";
    case inversion_method::bromwich:
        return "bromwich";
    case inversion_method::probabilistic_cdf:
        return "probabilistic_cdf";
    }
    return "laguerre";
}

struct inversion_params {
    std::optional<std::size_t> N;
    std::optional<double> lambda0;
    std::optional<double> gamma;
    std::optional<double> T;
    std::optional<double> tol;
};

struct inversion_report {
    std::vector<double> xs;
    std::vector<double> values;
    inversion_method method = inversion_method::laguerre;
    inversion_params params;
    std::optional<coeff_diagnostics> diagnostics;
};

// Evaluation grids live on (0, inf) and must be strictly increasing.
inline void validate_grid(std::span<const double> xs) {
    if (xs.empty())
        throw domain_error("evaluation grid is empty");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !(xs[i] > 0.0))
            throw domain_error("grid points must be finite and strictly positive");
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw domain_error("grid must be strictly increasing");
    }
}

// Inclusive grid of `count` equally spaced points.
inline std::vector<double> linear_grid(double start, double stop, std::size_t count) {
    if (count < 2)
        throw domain_error("grid needs at least two points");
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i)
        xs[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    xs.back() = stop;
    validate_grid(xs);
    return xs;
}

// Taylor coefficients at 0 of y -> g(y) * f(g(y)), g(y) = lambda/(1-y), to
// order n. Shared by the inversion and the UMVUE code; the latter drops the
// leading factor g(y). The expression is evaluated directly on the series of
// g: composing a finished jet of f at lambda with g - lambda would sum terms
// of size C(n-1, k-1) lambda^k |f_k| that cancel almost completely.
inline power_series moebius_substitution(const transform_expr& f, double lambda, std::size_t n, bool with_prefactor) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw domain_error("expansion rate must be positive");
    if (n > max_order())
        throw domain_error("series order " + std::to_string(n) + " exceeds maximum " + std::to_string(max_order()));
    // a pole at lambda itself is an input error, not a diagnostic outcome
    (void)eval_real(f, lambda);
    const power_series g(0.0, std::vector<double>(n + 1, lambda));
    const power_series composed = eval_on_series(f, g);
    return with_prefactor ? mul(composed, g) : composed;
}

inline coeff_diagnostics phi_to_coeffs(const transform_expr& phi, double lambda0, std::size_t N) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw domain_error("lambda0 must be positive");
    (void)eval_real(phi, lambda0);
    try {
        const power_series big_phi = moebius_substitution(phi, lambda0, N, true);
        return classify_coefficients({big_phi.coeffs().begin(), big_phi.coeffs().end()});
    } catch (const singularity_error&) {
        // coefficient overflow during the substitution
        return detail::failed({}, decay_kind::diverging);
    }
}

inline estimator_series laguerre_series(const coeff_diagnostics& diag, double lambda0) {
    return {lambda0, diag.coeffs, 1.0, series_kind::laplace_inverse};
}

// Partial sum u_N of the Laguerre inversion series on the grid. A failing
// diagnostic verdict raises divergence_error unless `allow_failed` is set,
// in which case the report carries verdict suspect.
inline inversion_report invert_laguerre(const transform_expr& phi, double lambda0, std::size_t N,
                                        std::span<const double> xs, bool allow_failed = false) {
    validate_grid(xs);
    coeff_diagnostics diag = phi_to_coeffs(phi, lambda0, N);
    if (diag.status == verdict::fails) {
        if (!allow_failed || diag.coeffs.empty())
            throw divergence_error("Laguerre coefficients of '" + phi.source() + "' are not square-summable (" +
                                       std::string(to_string(diag.decay.kind)) + ")",
                                   {});
        diag.status = verdict::suspect;
    }
    inversion_report rep;
    rep.xs.assign(xs.begin(), xs.end());
    rep.method = inversion_method::laguerre;
    rep.params.N = N;
    rep.params.lambda0 = lambda0;
    const estimator_series u = laguerre_series(diag, lambda0);
    rep.values.reserve(xs.size());
    for (double x : xs)
        rep.values.push_back(u(x));
    rep.diagnostics = std::move(diag);
    return rep;
}

// v_N(x) = (-1)^N / N! (N/x)^(N+1) phi^(N)(N/x). The jet is taken in the
// scaled variable s = c(1 + u), c = N/x, so its N-th coefficient already
// holds c^N phi^(N)(c) / N! and no factorial or power is formed explicitly.
inline double invert_post_widder(const transform_expr& phi, std::size_t N, double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw domain_error("Post-Widder inversion requires x > 0");
    if (N == 0)
        throw domain_error("Post-Widder inversion requires N >= 1");
    const double c = static_cast<double>(N) / x;
    const power_series jet = eval_jet(phi, c, N, c);
    const double lead = jet[N];
    if (lead == 0.0)
        return 0.0;
    const double log_mag = std::log(c) + std::log(std::abs(lead));
    if (log_mag >= std::log(std::numeric_limits<double>::max()))
        throw overflow_error("Post-Widder term overflows binary64");
    const double v = std::exp(log_mag);
    const bool negative = (lead < 0.0) != (N % 2 == 1);
    return negative ? -v : v;
}

// Partial sum of sum_k (-1)^k / k! (N/x)^k phi^(k)(N/x), which tends to
// mu([0,x)) + mu({x})/2 when phi is the transform of a probability measure.
inline double invert_cdf_probabilistic(const transform_expr& mgf, std::size_t N, double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw domain_error("CDF inversion requires x > 0");
    if (N == 0)
        throw domain_error("CDF inversion requires N >= 1");
    const double c = static_cast<double>(N) / x;
    const power_series jet = eval_jet(mgf, c, N, c);
    compensated_sum s;
    for (std::size_t k = 0; k <= N; ++k)
        s.add(k % 2 == 0 ? jet[k] : -jet[k]);
    const double r = s.value();
    if (!std::isfinite(r))
        throw overflow_error("CDF inversion sum overflows binary64");
    return r;
}

inline constexpr double bromwich_max_T = 1048576.0; // 2^20

namespace detail {

struct bromwich_integrand {
    const transform_expr& phi;
    double gamma;
    double x;

    // Re[e^{itx} phi(gamma + it)]; the factor e^{gamma x} is applied outside.
    double operator()(double t) const {
        const std::complex<double> s(gamma, t);
        const std::complex<double> v = std::polar(1.0, t * x) * eval_complex(phi, s);
        return v.real();
    }

    double envelope(double t) const { return std::abs(eval_complex(phi, {gamma, t})); }
};

// Integral over [a, b] split into chunks no longer than `chunk`.
inline double integrate_chunked(const bromwich_integrand& f, double a, double b, double chunk, double eps) {
    compensated_sum s;
    const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / chunk - 1e-12));
    const std::size_t n = pieces == 0 ? 1 : pieces;
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = a + h * static_cast<double>(i);
        const double hi = i + 1 == n ? b : lo + h;
        s.add(adaptive_simpson(f, lo, hi, eps));
    }
    return s.value();
}

} // namespace detail

// (1/2 pi i) int_{gamma - iT}^{gamma + iT} e^{sx} phi(s) ds, truncated at a
// fixed T. This is the plain w_T used for error-vs-T tables.
inline double bromwich_truncated(const transform_expr& phi, double gamma, double T, double x, double tol = 1e-8) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw domain_error("Bromwich inversion requires x > 0");
    const detail::bromwich_integrand f{phi, gamma, x};
    const double period = 2.0 * std::numbers::pi / x;
    const double chunk = std::min(0.25 * period, 2.0);
    const double scale = std::exp(gamma * x) / std::numbers::pi;
    return scale * detail::integrate_chunked(f, 0.0, T, chunk, 1e-3 * tol / scale);
}

// Bromwich integral with T doubled until two successive estimates differ by
// less than tol and |phi| has decayed between them. Each estimate averages
// the truncations at T and T + pi/x, which cancels the leading oscillatory
// truncation term and leaves an O(1/T^2) error for phi = O(1/s).
inline double invert_bromwich(const transform_expr& phi, double gamma, double x, double tol = 1e-6) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw domain_error("Bromwich inversion requires x > 0");
    if (!(tol > 0.0))
        throw domain_error("Bromwich tolerance must be positive");
    const detail::bromwich_integrand f{phi, gamma, x};
    const double period = 2.0 * std::numbers::pi / x;
    const double chunk = std::min(0.25 * period, 2.0);
    const double scale = std::exp(gamma * x) / std::numbers::pi;
    const double eps = 1e-3 * tol / scale;
    const double half = 0.5 * period;

    double T = std::max(16.0, 4.0 * period);
    double base = detail::integrate_chunked(f, 0.0, T, chunk, eps);
    auto estimate = [&](double upto, double integral) {
        return scale * (integral + 0.5 * detail::integrate_chunked(f, upto, upto + half, chunk, eps));
    };
    double previous = estimate(T, base);
    double env_prev = f.envelope(T);
    while (2.0 * T <= bromwich_max_T) {
        base += detail::integrate_chunked(f, T, 2.0 * T, chunk, eps);
        T *= 2.0;
        const double current = estimate(T, base);
        const double env = f.envelope(T);
        if (std::abs(current - previous) < tol && env <= env_prev)
            return current;
        previous = current;
        env_prev = env;
        if (2.0 * T > bromwich_max_T)
            throw convergence_error("Bromwich integral did not converge before T = 2^20", previous, current);
    }
    throw convergence_error("Bromwich integral did not converge before T = 2^20", previous, previous);
}

// Error of each method against a declared reference u(x) for a list of N.
// For Bromwich, N is the truncation height T.
struct comparison_row {
    inversion_method method;
    std::size_t N;
    std::vector<double> values;
    std::vector<double> errors;
    double max_abs_error;
};

inline std::vector<comparison_row> compare_methods(const transform_expr& phi, const transform_expr& reference,
                                                   std::span<const std::size_t> Ns, std::span<const double> xs,
                                                   double lambda0 = 1.0, double gamma = 1.0) {
    validate_grid(xs);
    std::vector<double> truth;
    for (double x : xs)
        truth.push_back(eval_real(reference, x));

    std::vector<comparison_row> rows;
    auto finish = [&](inversion_method m, std::size_t N, std::vector<double> values) {
        comparison_row r{m, N, std::move(values), {}, 0.0};
        for (std::size_t i = 0; i < xs.size(); ++i) {
            r.errors.push_back(r.values[i] - truth[i]);
            r.max_abs_error = std::max(r.max_abs_error, std::abs(r.errors.back()));
        }
        rows.push_back(std::move(r));
    };
    for (std::size_t N : Ns) {
        finish(inversion_method::laguerre, N, invert_laguerre(phi, lambda0, N, xs, true).values);
        std::vector<double> pw, br;
        for (double x : xs) {
            pw.push_back(invert_post_widder(phi, N, x));
            br.push_back(bromwich_truncated(phi, gamma, static_cast<double>(N), x));
        }
        finish(inversion_method::post_widder, N, std::move(pw));
        finish(inversion_method::bromwich, N, std::move(br));
    }
    return rows;
}

} // namespace laginv
