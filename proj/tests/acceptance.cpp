// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "laginv/laginv.hpp"

using namespace laginv;

namespace {

struct outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int cli_exit(const std::string& args) {
    const std::string cmd = std::string(LAGINV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Composite Simpson, even panel count.
template <class F>
double simpson(F f, double lo, double hi, int panels) {
    const double h = (hi - lo) / panels;
    double s = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i)
        s += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

outcome polynomial_exactness() {
    std::mt19937_64 gen(31337);
    std::uniform_int_distribution<int> coef(-9, 9);
    const auto xs = grid(0.1, 10.0, 50);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int deg = 1 + static_cast<int>(gen() % 8);
        std::vector<double> u(static_cast<std::size_t>(deg) + 1);
        for (auto& c : u)
            c = coef(gen);
        if (u.back() == 0.0)
            u.back() = 1.0;
        // L{x^k} = k! / s^(k+1)
        std::string phi = "0";
        double fact = 1.0;
        for (int k = 0; k <= deg; ++k) {
            if (k > 0)
                fact *= k;
            phi += " + " + fmt("%.17g", u[static_cast<std::size_t>(k)] * fact) + "/s^" + std::to_string(k + 1);
        }
        // a finite series: too few terms for the decay classifier, so its verdict is overridden
        const auto rep = invert_laguerre(parse(phi), 1.0, static_cast<std::size_t>(deg), xs, true);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double want = 0.0, mag = 0.0;
            for (int k = deg; k >= 0; --k) {
                want = want * xs[i] + u[static_cast<std::size_t>(k)];
                mag = mag * xs[i] + std::abs(u[static_cast<std::size_t>(k)]);
            }
            worst = std::max(worst, std::abs(rep.values[i] - want) / std::max(std::abs(want), 1e-3 * mag));
        }
    }
    return {worst <= 1e-10, "max relative error " + fmt("%.2e", worst)};
}

outcome exponential_recovery() {
    const auto xs = grid(0.1, 10.0, 200);
    const auto rep = invert_laguerre(parse("1/(s+1)"), 1.0, 40, xs);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        worst = std::max(worst, std::abs(rep.values[i] - std::exp(-xs[i])));
    return {worst <= 1e-8, "max error " + fmt("%.2e", worst)};
}

outcome rate_invariance() {
    const auto xs = grid(0.1, 10.0, 40);
    double worst = 0.0;
    for (const char* phi : {"1/s", "1/s^2", "1/(s+1)", "1/(s+1)^2", "2/s^3", "1/(s+2)"}) {
        const auto base = invert_laguerre(parse(phi), 1.0, 80, xs).values;
        for (double l0 : {0.5, 2.0}) {
            const auto other = invert_laguerre(parse(phi), l0, 80, xs).values;
            for (std::size_t i = 0; i < xs.size(); ++i)
                worst = std::max(worst, std::abs(other[i] - base[i]));
        }
    }
    return {worst <= 1e-6, "max disagreement " + fmt("%.2e", worst)};
}

const char* const umvue_corpus[] = {"s", "1/s", "1/(s+1)", "exp(-s)", "s/(s+1)"};

outcome form_equivalence() {
    double worst = 0.0;
    for (const char* h : umvue_corpus)
        for (double lambda : {0.5, 1.0, 2.0})
            for (double a : {1.0, 3.0, 5.0}) {
                const estimation_problem p(parse(h), a);
                const auto s = beta_simple(p, lambda, 20).values;
                const auto d = beta_derivative_form(p, lambda, 20).values;
                double scale = 0.0;
                for (double v : s)
                    scale = std::max(scale, std::abs(v));
                for (std::size_t n = 0; n <= 20; ++n)
                    worst = std::max(worst, std::abs(s[n] - d[n]) / scale);
            }
    return {worst <= 1e-10, "max error relative to largest coefficient " + fmt("%.2e", worst)};
}

outcome cr_identity() {
    double worst = 0.0;
    for (const char* h : umvue_corpus)
        for (double lambda : {0.5, 1.0, 2.0})
            for (double a : {1.0, 3.0, 5.0}) {
                const estimation_problem p(parse(h), a);
                const double b1 = beta_simple(p, lambda, 2).values[1];
                const double cr = cr_bound(p, lambda);
                worst = std::max(worst, std::abs(b1 * b1 - cr) / std::max(cr, 1e-300));
            }
    return {worst <= 1e-12, "max relative gap " + fmt("%.2e", worst)};
}

outcome closed_form_umvue() {
    bool ok = true;
    std::ostringstream why;
    const estimation_problem rec(parse("1/s"), 3.0);
    const auto b = beta_simple(rec, 1.0, 10).values;
    for (std::size_t n = 2; n < b.size(); ++n)
        ok = ok && b[n] == 0.0;
    const auto u = build_umvue(rec, 1.0, 10);
    double worst = 0.0;
    for (double x : grid(0.1, 20.0, 50))
        worst = std::max(worst, std::abs(u(x) - x / 3.0));
    const double var = variance_series(rec, 1.0, 10).value;
    ok = ok && worst <= 1e-12 && std::abs(var - 1.0 / 3.0) <= 1e-14 && std::abs(cr_bound(rec, 1.0) - 1.0 / 3.0) <= 1e-14;
    why << "x/3 error " << fmt("%.1e", worst) << ", var " << fmt("%.15g", var);

    const estimation_problem rate(parse("s"), 5.0);
    const double at2 = build_umvue(rate, 1.0, 200)(2.0);
    ok = ok && std::abs(at2 - 2.0) <= 5e-2;
    why << ", u_200(2) = " << fmt("%.4f", at2);
    double prev = INFINITY;
    why << ", L2 errors";
    for (std::size_t M : {25u, 50u, 100u, 200u}) {
        const auto uM = build_umvue(rate, 1.0, M);
        const double e = simpson(
            [&](double x) {
                if (x <= 0.0)
                    return 0.0;
                const double d = uM(x) - 4.0 / x;
                return d * d * x * x * x * x * std::exp(-x) / 24.0;
            },
            0.0, 80.0, 8000);
        ok = ok && e < prev;
        prev = e;
        why << " " << fmt("%.2e", e);
    }
    return {ok, why.str()};
}

outcome variance_oracle() {
    const auto v = variance_series(estimation_problem(parse("s"), 5.0), 1.0, 200);
    const double gap = std::abs(v.value + v.tail - 1.0 / 3.0);
    return {gap <= v.tail && v.tail <= 0.02,
            "partial " + fmt("%.12f", v.value) + " tail " + fmt("%.2e", v.tail) + " gap " + fmt("%.2e", gap)};
}

outcome monte_carlo() {
    struct mc_case {
        const char* h;
        double a, lambda;
        std::size_t M;
    };
    bool ok = true;
    std::ostringstream why;
    for (const auto& c : {mc_case{"1/s", 3.0, 2.0, 10}, mc_case{"exp(-s)", 3.0, 1.0, 120},
                          mc_case{"1/(s+1)", 2.0, 1.0, 80}}) {
        const auto r = run_mc({estimation_problem(parse(c.h), c.a), c.lambda, 100000, 20240601, c.M});
        ok = ok && std::abs(r.z_score) <= 4.0 && r.empirical_var >= r.cr_bound * (1.0 - 3.0 / std::sqrt(1e5));
        why << c.h << ": z " << fmt("%.2f", r.z_score) << " var/cr " << fmt("%.3f", r.empirical_var / r.cr_bound)
            << "; ";
    }
    return {ok, why.str()};
}

outcome baselines() {
    const auto phi = parse("1/(s+1)");
    double pw_gap = 0.0;
    for (std::size_t N : {5u, 20u, 100u})
        for (double x : {0.5, 1.0, 2.0}) {
            const double Nd = static_cast<double>(N);
            pw_gap = std::max(pw_gap, std::abs(invert_post_widder(phi, N, x) - std::pow(Nd / (Nd + x), Nd + 1.0)));
        }
    const scoped_max_order cap(1024);
    const double pw1000 = std::abs(invert_post_widder(phi, 1000, 1.0) - std::exp(-1.0));
    struct pair {
        const char* phi;
        std::function<double(double)> u;
    };
    double br = 0.0;
    for (const auto& c : {pair{"1/(s+1)", [](double x) { return std::exp(-x); }}, pair{"1/s^2", [](double x) { return x; }},
                          pair{"1/(s+1)^2", [](double x) { return x * std::exp(-x); }}})
        for (double x : {0.5, 1.0, 2.0})
            br = std::max(br, std::abs(invert_bromwich(parse(c.phi), 1.0, x) - c.u(x)));
    return {pw_gap <= 1e-12 && pw1000 <= 1e-3 && br <= 1e-4, "closed-form gap " + fmt("%.1e", pw_gap) +
                                                                  ", N=1000 error " + fmt("%.2e", pw1000) +
                                                                  ", Bromwich error " + fmt("%.1e", br)};
}

outcome cdf_inversion() {
    const double e = std::abs(invert_cdf_probabilistic(parse("1/(1+s)"), 500, 1.0) - (1.0 - std::exp(-1.0)));
    const double m = std::abs(invert_cdf_probabilistic(parse("exp(-s)"), 400, 1.0) - 0.5);
    return {e <= 5e-3 && m <= 0.05, "exponential error " + fmt("%.2e", e) + ", point mass error " + fmt("%.3f", m)};
}

outcome negative_cases() {
    bool ok = true;
    std::ostringstream why;
    for (const char* h : {"1/(s^2-2*s+2)", "exp(s)"}) {
        const auto d = beta_simple(estimation_problem(parse(h), 1.0), 1.0, 80).diagnostics;
        const int code = cli_exit(std::string("check --h '") + h + "' --a 1 --lambda-grid 0.5:4:8 --M 80");
        ok = ok && d.status != verdict::converges && (code == 1 || code == 2);
        why << h << ": " << to_string(d.status) << " exit " << code << "; ";
    }
    for (const char* phi : {"exp(s)/s", "1/(s*(s^2-2*s+2))"}) {
        const auto d = phi_to_coeffs(parse(phi), 1.0, 80);
        const int code = cli_exit(std::string("invert --phi '") + phi + "' --N 80 --xs 1:2:2");
        ok = ok && d.status != verdict::converges && (code == 1 || code == 2);
        why << phi << ": " << to_string(d.status) << " exit " << code << "; ";
    }
    return {ok, why.str()};
}

outcome basis_integrity() {
    double ortho = 0.0;
    for (double a : {0.5, 1.0, 2.5}) {
        const auto b = build_basis(a, 15);
        for (double lambda : {0.5, 1.0, 3.0}) {
            const gamma_model m(a, lambda);
            for (std::size_t n = 0; n <= 15; ++n)
                for (std::size_t k = 0; k <= n; ++k)
                    ortho = std::max(ortho, std::abs(basis_inner_product(b, n, k, m) - (n == k ? 1.0 : 0.0)));
        }
    }
    // Rodrigues: d^n/dx^n[x^n f] / f = (-1)^n sqrt(n! [a]_n) q_{n;lambda}
    double rod = 0.0;
    for (double a : {0.5, 1.0, 2.5})
        for (double lambda : {0.5, 1.0, 3.0}) {
            const auto b = build_basis(a, 6);
            for (std::size_t n = 0; n <= 6; ++n) {
                const auto w = rodrigues_poly(n, gamma_model(a, lambda));
                const auto q = scaled_coefficients(b, n, lambda);
                double norm = 1.0;
                for (std::size_t j = 0; j < n; ++j)
                    norm *= static_cast<double>(j + 1) * (a + static_cast<double>(j));
                const double factor = (n % 2 == 0 ? 1.0 : -1.0) * std::sqrt(norm);
                for (std::size_t k = 0; k <= n; ++k) {
                    const double want = factor * q[k];
                    rod = std::max(rod, std::abs(w.coeffs[k] - want) / std::max(1.0, std::abs(want)));
                }
            }
        }
    return {ortho <= 1e-9 && rod <= 1e-10, "orthonormality " + fmt("%.1e", ortho) + ", Rodrigues " + fmt("%.1e", rod)};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria = {
        {"polynomial exactness", polynomial_exactness},
        {"exponential recovery", exponential_recovery},
        {"lambda0 invariance", rate_invariance},
        {"beta form equivalence", form_equivalence},
        {"CR first-term identity", cr_identity},
        {"closed-form UMVUE", closed_form_umvue},
        {"variance series vs inverse moment", variance_oracle},
        {"Monte Carlo unbiasedness", monte_carlo},
        {"baseline agreement", baselines},
        {"probabilistic CDF inversion", cdf_inversion},
        {"negative cases", negative_cases},
        {"basis integrity", basis_integrity},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2zu %s (%.0f ms): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), ms,
                    o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
