// Command-line front end: parse -> diagnose -> compute -> serialise.
//
// Exit codes: 0 converges, 2 suspect (result still written), 1 fails or error.
// Errors are written to stderr as {"stage", "message", "position"?}.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "CLI11.hpp"

#include "laginv/laginv.hpp"
#include "laginv/report.hpp"

namespace {

using namespace laginv;

class cli_error : public laginv::error {
public:
    explicit cli_error(const std::string& what) : error("cli", what) {}
};

double parse_double(std::string_view text, std::string_view what) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw cli_error("cannot read " + std::string(what) + " from '" + std::string(text) + "'");
    return v;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
    std::size_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw cli_error("cannot read " + std::string(what) + " from '" + std::string(text) + "'");
    return v;
}

// "start:stop:count", inclusive endpoints.
std::vector<double> parse_grid(const std::string& spec) {
    const auto first = spec.find(':');
    const auto second = first == std::string::npos ? first : spec.find(':', first + 1);
    if (second == std::string::npos || spec.find(':', second + 1) != std::string::npos)
        throw cli_error("grid must look like start:stop:count, got '" + spec + "'");
    const std::string_view s(spec);
    const double start = parse_double(s.substr(0, first), "grid start");
    const double stop = parse_double(s.substr(first + 1, second - first - 1), "grid stop");
    const std::size_t count = parse_count(s.substr(second + 1), "grid count");
    if (!(start > 0.0))
        throw cli_error("grid start must be positive");
    return linear_grid(start, stop, count);
}

std::vector<std::size_t> parse_list(const std::string& spec) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto comma = spec.find(',', pos);
        const auto end = comma == std::string::npos ? spec.size() : comma;
        out.push_back(parse_count(std::string_view(spec).substr(pos, end - pos), "N list"));
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

transform_expr parse_flag(const std::string& text) { return laginv::parse(text); }

int exit_code(verdict v) {
    switch (v) {
    case verdict::converges:
        return 0;
    case verdict::suspect:
        return 2;
    case verdict::fails:
        return 1;
    }
    return 1;
}

struct output_options {
    std::string format = "json";
    std::string out;

    void emit(const json& j, const std::string& csv) const {
        const std::string text = format == "csv" ? csv : j.dump(2) + "\n";
        if (out.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream f(out, std::ios::binary);
        if (!f)
            throw cli_error("cannot open output file '" + out + "'");
        f << text;
        if (!f)
            throw cli_error("failed writing output file '" + out + "'");
    }
};

void add_output_flags(CLI::App* sub, output_options& o) {
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", o.out, "output path (default: standard output)");
}

void print_error(const std::string& stage, const std::string& message, std::optional<std::size_t> position = {}) {
    std::cerr << error_envelope(stage, message, position).dump() << "\n";
}

void apply_order_override() {
    const char* env = std::getenv("LAGINV_MAX_ORDER");
    if (env == nullptr || *env == '\0')
        return;
    set_max_order(parse_count(env, "LAGINV_MAX_ORDER"));
}

struct invert_args {
    std::string phi, method = "laguerre", xs;
    std::size_t N = 40;
    double lambda0 = 1.0, gamma = 1.0, tol = 1e-6;
    bool force = false;
    output_options out;
};

int cmd_invert(const invert_args& a) {
    const transform_expr phi = parse_flag(a.phi);
    const std::vector<double> xs = parse_grid(a.xs);
    inversion_report rep;
    rep.xs = xs;
    int code = 0;
    if (a.method == "laguerre") {
        try {
            rep = invert_laguerre(phi, a.lambda0, a.N, xs, a.force);
            code = exit_code(rep.diagnostics->status);
        } catch (const divergence_error& e) {
            // Report the rejected coefficients with verdict fails.
            rep.method = inversion_method::laguerre;
            rep.params.N = a.N;
            rep.params.lambda0 = a.lambda0;
            rep.values.assign(xs.size(), std::numeric_limits<double>::quiet_NaN());
            rep.diagnostics = phi_to_coeffs(phi, a.lambda0, a.N);
            a.out.emit(to_json(rep), to_csv(rep));
            print_error(e.stage(), e.what());
            return 1;
        }
    } else if (a.method == "post-widder") {
        rep.method = inversion_method::post_widder;
        rep.params.N = a.N;
        for (double x : xs)
            rep.values.push_back(invert_post_widder(phi, a.N, x));
    } else if (a.method == "bromwich") {
        rep.method = inversion_method::bromwich;
        rep.params.gamma = a.gamma;
        rep.params.tol = a.tol;
        for (double x : xs)
            rep.values.push_back(invert_bromwich(phi, a.gamma, x, a.tol));
    } else {
        rep.method = inversion_method::probabilistic_cdf;
        rep.params.N = a.N;
        for (double x : xs)
            rep.values.push_back(invert_cdf_probabilistic(phi, a.N, x));
    }
    a.out.emit(to_json(rep), to_csv(rep));
    return code;
}

struct umvue_args {
    std::string h, xs;
    double a = 1.0, lambda = 1.0, lambda0 = 1.0;
    std::size_t n = 1, M = 40;
    output_options out;
};

int cmd_umvue(const umvue_args& a) {
    const auto p = estimation_problem::from_sample(parse_flag(a.h), a.n, a.a);
    const std::vector<double> xs = a.xs.empty() ? std::vector<double>{} : parse_grid(a.xs);
    const umvue_report r = make_umvue_report(p, a.lambda, a.lambda0, a.M, xs);
    a.out.emit(to_json(r), to_csv(r));
    return exit_code(r.beta.diagnostics.status);
}

struct check_args {
    std::string h, grid;
    double a = 1.0;
    std::size_t n = 1, M = 80;
    output_options out;
};

int cmd_check(const check_args& a) {
    const auto p = estimation_problem::from_sample(parse_flag(a.h), a.n, a.a);
    const check_report r = run_check(p, parse_grid(a.grid), a.M);
    a.out.emit(to_json(r), to_csv(r));
    return exit_code(r.overall);
}

struct mc_args {
    std::string h;
    double a = 1.0, lambda = 1.0, lambda0 = 1.0;
    std::size_t n = 1, reps = 100000, M = 40;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    output_options out;
};

int cmd_mc(const mc_args& a) {
    mc_config cfg{estimation_problem::from_sample(parse_flag(a.h), a.n, a.a), a.lambda, a.reps, a.seed, a.M,
                  a.lambda0, a.threads};
    const mc_report r = run_mc(cfg);
    a.out.emit(to_json(r), to_csv(r));
    return 0;
}

struct basis_args {
    double a = 1.0;
    std::size_t max_degree = 5;
    output_options out;
};

int cmd_basis(const basis_args& a) {
    const ortho_basis b = build_basis(a.a, a.max_degree);
    a.out.emit(to_json(b), to_csv(b));
    return 0;
}

struct compare_args {
    std::string phi, ref, n_list = "10,20,40", xs;
    double lambda0 = 1.0, gamma = 1.0;
    output_options out;
};

int cmd_compare(const compare_args& a) {
    const transform_expr phi = parse_flag(a.phi);
    const transform_expr ref = parse_flag(a.ref);
    const std::vector<double> xs = parse_grid(a.xs);
    const std::vector<std::size_t> Ns = parse_list(a.n_list);
    const auto rows = compare_methods(phi, ref, Ns, xs, a.lambda0, a.gamma);
    a.out.emit(to_json(rows, xs), to_csv(rows));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplace inversion and unbiased estimation by Laguerre series"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print this help and exit"); // -h would clash with --h

    invert_args inv;
    auto* invert = app.add_subcommand("invert", "invert a Laplace transform on a grid");
    invert->add_option("--phi", inv.phi, "transform in the variable s")->required();
    invert->add_option("--method", inv.method, "laguerre, post-widder, bromwich or cdf")
        ->check(CLI::IsMember({"laguerre", "post-widder", "bromwich", "cdf"}));
    invert->add_option("--N", inv.N, "series order");
    invert->add_option("--lambda0", inv.lambda0, "expansion rate");
    invert->add_option("--gamma", inv.gamma, "Bromwich abscissa");
    invert->add_option("--tol", inv.tol, "Bromwich tolerance");
    invert->add_option("--xs", inv.xs, "grid start:stop:count")->required();
    invert->add_flag("--force", inv.force, "evaluate even when the diagnostics reject the series");
    add_output_flags(invert, inv.out);

    umvue_args um;
    auto* umvue = app.add_subcommand("umvue", "UMVUE coefficients, variance and Cramer-Rao bound");
    umvue->add_option("--h", um.h, "estimand in the variable s")->required();
    umvue->add_option("--a", um.a, "shape per observation")->required();
    umvue->add_option("--n", um.n, "sample size");
    umvue->add_option("--lambda", um.lambda, "rate for the coefficients")->required();
    umvue->add_option("--lambda0", um.lambda0, "expansion rate of the estimator");
    umvue->add_option("--M", um.M, "series order");
    umvue->add_option("--xs", um.xs, "optional grid start:stop:count for estimator values");
    add_output_flags(umvue, um.out);

    check_args ck;
    auto* check = app.add_subcommand("check", "existence diagnostics over a grid of rates");
    check->add_option("--h", ck.h, "estimand in the variable s")->required();
    check->add_option("--a", ck.a, "shape per observation");
    check->add_option("--n", ck.n, "sample size");
    check->add_option("--lambda-grid", ck.grid, "grid start:stop:count")->required();
    check->add_option("--M", ck.M, "series order");
    add_output_flags(check, ck.out);

    mc_args mc;
    auto* mcs = app.add_subcommand("mc", "Monte Carlo check of the UMVUE");
    mcs->add_option("--h", mc.h, "estimand in the variable s")->required();
    mcs->add_option("--a", mc.a, "shape per observation")->required();
    mcs->add_option("--n", mc.n, "sample size");
    mcs->add_option("--lambda", mc.lambda, "true rate")->required();
    mcs->add_option("--reps", mc.reps, "replications (>= 100)");
    mcs->add_option("--seed", mc.seed, "64-bit seed");
    mcs->add_option("--M", mc.M, "series order");
    mcs->add_option("--lambda0", mc.lambda0, "expansion rate of the estimator");
    mcs->add_option("--threads", mc.threads, "worker threads (0: all cores)");
    add_output_flags(mcs, mc.out);

    basis_args bs;
    auto* basis = app.add_subcommand("basis", "monomial tables of the orthonormal basis");
    basis->add_option("--a", bs.a, "shape")->required();
    basis->add_option("--max-degree", bs.max_degree, "highest degree");
    add_output_flags(basis, bs.out);

    compare_args cmp;
    auto* compare = app.add_subcommand("compare", "error of each method against a reference");
    compare->add_option("--phi", cmp.phi, "transform in the variable s")->required();
    compare->add_option("--ref", cmp.ref, "reference inverse, written in the variable s")->required();
    compare->add_option("--N-list", cmp.n_list, "comma separated orders");
    compare->add_option("--xs", cmp.xs, "grid start:stop:count")->required();
    compare->add_option("--lambda0", cmp.lambda0, "expansion rate");
    compare->add_option("--gamma", cmp.gamma, "Bromwich abscissa");
    add_output_flags(compare, cmp.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        print_error("cli", e.what());
        return 1;
    }

    try {
        apply_order_override();
        if (invert->parsed())
            return cmd_invert(inv);
        if (umvue->parsed())
            return cmd_umvue(um);
        if (check->parsed())
            return cmd_check(ck);
        if (mcs->parsed())
            return cmd_mc(mc);
        if (basis->parsed())
            return cmd_basis(bs);
        return cmd_compare(cmp);
    } catch (const parse_error& e) {
        print_error(e.stage(), e.what(), e.position());
    } catch (const laginv::error& e) {
        print_error(e.stage(), e.what());
    } catch (const std::exception& e) {
        print_error("internal", e.what());
    }
    return 1;
}
