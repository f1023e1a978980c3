#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cholesky.hpp"
#include "errors.hpp"
#include "gmrf.hpp"
#include "logdet.hpp"
#include "matrix_market.hpp"
#include "probe.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "sparse.hpp"
#include "spectral.hpp"
#include "synthetic.hpp"

namespace melt {
namespace cli {

// Everything the flag surface can express. Exactly one matrix source may be
// set for the commands that take one; sweep commands generate their own.
struct RunConfig {
    std::string matrix_path;          // --matrix PATH
    std::size_t synthetic_n = 0;      // --synthetic n=N
    std::size_t lattice_rows = 0;     // --lattice RxC
    std::size_t lattice_cols = 0;
    std::size_t moments = 10;         // --moments
    std::size_t probes = 30;          // --probes
    ProbeKind kind = ProbeKind::Rademacher;
    std::uint64_t seed = 0;           // --seed
    double tol = 1e-6;                // --tol
    std::size_t quad_nodes = 512;     // --quad-nodes
    bool has_exact = false;           // --exact V given?
    double exact_value = 0.0;
    double nugget = 0.0;              // --nugget
    double kappa = 0.1;               // --kappa
    double tau = 1.0;                 // --tau
    std::string out_path;             // --out (default: stdout)
    std::string method = "maxent";    // --method (estimate only)
    std::size_t n_min = 100;          // sweep-n ladder
    std::size_t n_max = 1000;
    std::size_t n_step = 100;
    std::size_t reps = 25;
    std::vector<std::size_t> sides = {32, 64, 128, 256, 512}; // gmrf-bench ladder
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_seconds(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline double percentile(std::vector<double> sorted, double q) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q / 100.0;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

inline ProbeKind probe_kind_from(const std::string& name) {
    if (name == "rademacher") return ProbeKind::Rademacher;
    if (name == "gaussian") return ProbeKind::Gaussian;
    if (name == "sphere") return ProbeKind::UnitSphere;
    if (name == "basis") return ProbeKind::FixedBasis;
    throw contract_error("unknown probe kind '" + name + "'");
}

inline void parse_synthetic_spec(const std::string& spec, RunConfig& cfg) {
    std::string num = spec;
    if (num.rfind("n=", 0) == 0) num = num.substr(2);
    try {
        const long long v = std::stoll(num);
        if (v < 2) throw contract_error("--synthetic needs n >= 2");
        cfg.synthetic_n = static_cast<std::size_t>(v);
    } catch (const std::invalid_argument&) {
        throw contract_error("--synthetic expects n=N, got '" + spec + "'");
    } catch (const std::out_of_range&) {
        throw contract_error("--synthetic value out of range: '" + spec + "'");
    }
}

inline void parse_lattice_spec(const std::string& spec, RunConfig& cfg) {
    const std::size_t xpos = spec.find('x');
    if (xpos == std::string::npos || xpos == 0 || xpos + 1 >= spec.size())
        throw contract_error("--lattice expects RxC, got '" + spec + "'");
    try {
        const long long r = std::stoll(spec.substr(0, xpos));
        const long long c = std::stoll(spec.substr(xpos + 1));
        if (r < 1 || c < 1) throw contract_error("--lattice dimensions must be positive");
        cfg.lattice_rows = static_cast<std::size_t>(r);
        cfg.lattice_cols = static_cast<std::size_t>(c);
    } catch (const std::invalid_argument&) {
        throw contract_error("--lattice expects RxC, got '" + spec + "'");
    } catch (const std::out_of_range&) {
        throw contract_error("--lattice value out of range: '" + spec + "'");
    }
}

// Builds the matrix a command operates on. `need_source` commands must name
// exactly one of --matrix / --synthetic / --lattice.
inline SparseSymMatrix load_source(const RunConfig& cfg) {
    const int sources = (cfg.matrix_path.empty() ? 0 : 1) + (cfg.synthetic_n > 0 ? 1 : 0) +
                        (cfg.lattice_rows > 0 ? 1 : 0);
    if (sources != 1)
        throw contract_error(
            "exactly one matrix source required (--matrix, --synthetic, or --lattice)");
    if (!cfg.matrix_path.empty()) return load_matrix_market(cfg.matrix_path);
    if (cfg.synthetic_n > 0) return synth_wishart_identity(cfg.synthetic_n, cfg.seed);
    LatticeSpec spec;
    spec.rows = cfg.lattice_rows;
    spec.cols = cfg.lattice_cols;
    spec.kappa = cfg.kappa;
    spec.tau = cfg.tau;
    spec.nugget_variance = cfg.nugget;
    return build_precision(spec);
}

inline LogDetOptions logdet_options(const RunConfig& cfg) {
    LogDetOptions opts;
    opts.tol = cfg.tol;
    opts.quad_nodes = cfg.quad_nodes;
    return opts;
}

// Exact reference for error columns: the --exact flag wins; otherwise the
// oracle runs when the matrix is small or banded enough to factor.
inline bool exact_reference(const RunConfig& cfg, const SparseSymMatrix& a, double& value) {
    if (cfg.has_exact) {
        value = cfg.exact_value;
        return true;
    }
    try {
        value = exact_logdet(a);
        return true;
    } catch (const contract_error&) {
        return false; // too large for the oracle; leave the column empty
    }
}

inline LogDetResult run_method(const std::string& method, const SparseSymMatrix& a,
                               std::size_t k, std::size_t m, const RunConfig& cfg) {
    const LogDetOptions opts = logdet_options(cfg);
    if (method == "maxent") return logdet_maxent(a, k, m, cfg.kind, cfg.seed, opts);
    if (method == "taylor") return logdet_taylor(a, k, m, cfg.kind, cfg.seed, opts);
    if (method == "chebyshev") return logdet_chebyshev(a, k, m, cfg.kind, cfg.seed, opts);
    if (method == "exact") {
        melt::detail::WallTimer timer;
        LogDetResult r;
        r.method = "exact";
        r.estimate = exact_logdet(a);
        r.k = 0;
        r.m = 0;
        r.matvecs = 0;
        r.seconds = timer.seconds();
        return r;
    }
    throw contract_error("unknown method '" + method + "'");
}

inline void emit_result_row(std::ostream& csv, const LogDetResult& r, bool have_exact,
                            double exact) {
    csv << r.method << ',' << r.k << ',' << r.m << ',' << fmt(r.estimate) << ',';
    if (have_exact) csv << fmt(exact);
    csv << ',';
    if (have_exact && exact != 0.0) csv << fmt(relative_error(r.estimate, exact));
    csv << ',' << r.matvecs << ',' << fmt_seconds(r.seconds) << '\n';
}

constexpr const char* kResultHeader = "method,k,m,estimate,exact,relative_error,matvecs,seconds";

inline void cmd_estimate(const RunConfig& cfg, std::ostream& csv) {
    const SparseSymMatrix a = load_source(cfg);
    double exact = 0.0;
    bool have_exact = cfg.has_exact;
    if (have_exact) exact = cfg.exact_value;
    const LogDetResult r = run_method(cfg.method, a, cfg.moments, cfg.probes, cfg);
    if (cfg.method == "exact" && !have_exact) {
        exact = r.estimate;
        have_exact = true;
    }
    csv << kResultHeader << '\n';
    emit_result_row(csv, r, have_exact, exact);
}

inline void cmd_compare(const RunConfig& cfg, std::ostream& csv) {
    const SparseSymMatrix a = load_source(cfg);
    double exact = 0.0;
    const bool have_exact = exact_reference(cfg, a, exact);
    csv << kResultHeader << '\n';
    static const std::size_t budgets[] = {5, 10, 15, 20, 25, 30};
    static const char* methods[] = {"maxent", "taylor", "chebyshev"};
    for (const std::size_t k : budgets)
        for (const char* method : methods) {
            const LogDetResult r = run_method(method, a, k, cfg.probes, cfg);
            emit_result_row(csv, r, have_exact, exact);
        }
}

inline void cmd_sweep_n(const RunConfig& cfg, std::ostream& csv) {
    if (cfg.n_min < 2 || cfg.n_step < 1 || cfg.n_max < cfg.n_min || cfg.reps < 1)
        throw contract_error("sweep-n: bad ladder (need n-min >= 2, n-step >= 1, reps >= 1)");
    csv << "n,p10,p30,p50,p70,p90\n";
    for (std::size_t n = cfg.n_min; n <= cfg.n_max; n += cfg.n_step) {
        std::vector<double> errors;
        errors.reserve(cfg.reps);
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            const std::uint64_t pt_seed =
                Rng::derive(cfg.seed, n * 1000003ULL + rep).next_u64();
            const SparseSymMatrix a = synth_wishart_identity(n, pt_seed);
            const double exact = exact_logdet(a);
            const LogDetResult r = logdet_maxent(a, cfg.moments, cfg.probes, cfg.kind,
                                                 pt_seed, logdet_options(cfg));
            errors.push_back(relative_error(r.estimate, exact));
        }
        std::sort(errors.begin(), errors.end());
        csv << n;
        for (const double q : {10.0, 30.0, 50.0, 70.0, 90.0})
            csv << ',' << fmt(percentile(errors, q));
        csv << '\n';
    }
}

inline void cmd_gmrf_bench(const RunConfig& cfg, std::ostream& csv) {
    csv << "side,method,nugget,loglik,seconds\n";
    for (const std::size_t side : cfg.sides) {
        LatticeSpec spec;
        spec.rows = side;
        spec.cols = side;
        spec.kappa = cfg.kappa;
        spec.tau = cfg.tau;
        const SparseSymMatrix q = build_precision(spec);
        const std::uint64_t side_seed = Rng::derive(cfg.seed, side).next_u64();
        const std::vector<double> x = sample_gmrf(q, side_seed);
        const LogDetMethod entropic = LogDetMethod::entropic(
            cfg.moments, cfg.probes, cfg.kind, side_seed, logdet_options(cfg));

        struct Arm {
            const char* name;
            LogDetMethod method;
        };
        const Arm arms[] = {{"exact", LogDetMethod::exact()}, {"maxent", entropic}};
        for (const Arm& arm : arms) {
            melt::detail::WallTimer timer;
            const double ll = log_likelihood(q, x, arm.method);
            csv << side << ',' << arm.name << ",0," << fmt(ll) << ','
                << fmt_seconds(timer.seconds()) << '\n';
        }
        if (cfg.nugget > 0.0)
            for (const Arm& arm : arms) {
                melt::detail::WallTimer timer;
                const double ll = log_likelihood_nugget(q, x, cfg.nugget, arm.method);
                csv << side << ',' << arm.name << ',' << fmt(cfg.nugget) << ',' << fmt(ll)
                    << ',' << fmt_seconds(timer.seconds()) << '\n';
            }
    }
}

inline void cmd_gmrf_sweep(const RunConfig& cfg, std::ostream& csv) {
    LatticeSpec truth;
    truth.rows = cfg.lattice_rows > 0 ? cfg.lattice_rows : 64;
    truth.cols = cfg.lattice_cols > 0 ? cfg.lattice_cols : 64;
    truth.kappa = cfg.kappa;
    truth.tau = cfg.tau;
    const SparseSymMatrix q_truth = build_precision(truth);
    const std::vector<double> x =
        sample_gmrf(q_truth, Rng::derive(cfg.seed, 0xDA7AULL).next_u64());

    csv << "kappa,tau,exact,entropic,diff\n";
    for (std::size_t i = 0; i < 15; ++i) {
        LatticeSpec point = truth;
        point.kappa = 0.02 * static_cast<double>(i + 1); // 0.02 .. 0.30
        const SparseSymMatrix q = build_precision(point);
        const double exact = log_likelihood(q, x);
        const std::uint64_t pt_seed = Rng::derive(cfg.seed, 777 + 31 * i).next_u64();
        const double entropic = log_likelihood(
            q, x,
            LogDetMethod::entropic(cfg.moments, cfg.probes, cfg.kind, pt_seed,
                                   logdet_options(cfg)));
        csv << fmt(point.kappa) << ',' << fmt(point.tau) << ',' << fmt(exact) << ','
            << fmt(entropic) << ',' << fmt(entropic - exact) << '\n';
    }
}

} // namespace detail

// Full command-line entry point. Streams are injectable so tests can run the
// CLI in-process; exit codes: 0 ok, 2 input error, 3 numerical failure.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Matrix-free log-determinant estimation (entropic spectral fitting)"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string synth_spec, lattice_spec, probe_kind_str = "rademacher", sides_str;

    app.add_option("--matrix", cfg.matrix_path, "Matrix Market file (symmetric coordinate)");
    app.add_option("--synthetic", synth_spec, "synthetic Wishart-plus-identity source, n=N");
    app.add_option("--lattice", lattice_spec, "GMRF lattice source, RxC");
    app.add_option("--moments", cfg.moments, "number of spectral moments k")->capture_default_str();
    app.add_option("--probes", cfg.probes, "number of probing vectors m")->capture_default_str();
    app.add_option("--probe-kind", probe_kind_str, "rademacher|gaussian|sphere|basis")
        ->check(CLI::IsMember({"rademacher", "gaussian", "sphere", "basis"}))
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    app.add_option("--tol", cfg.tol, "MaxEnt fit tolerance")->capture_default_str();
    app.add_option("--quad-nodes", cfg.quad_nodes, "quadrature nodes")->capture_default_str();
    auto* opt_exact = app.add_option("--exact", cfg.exact_value,
                                     "externally supplied exact log determinant");
    app.add_option("--nugget", cfg.nugget, "nugget variance (gmrf commands)")
        ->capture_default_str();
    app.add_option("--kappa", cfg.kappa, "lattice kappa")->capture_default_str();
    app.add_option("--tau", cfg.tau, "lattice tau")->capture_default_str();
    app.add_option("--out", cfg.out_path, "write CSV to this file instead of stdout");
    app.add_option("--method", cfg.method, "estimate method: maxent|taylor|chebyshev|exact")
        ->check(CLI::IsMember({"maxent", "taylor", "chebyshev", "exact"}))
        ->capture_default_str();
    app.add_option("--n-min", cfg.n_min, "sweep-n smallest dimension")->capture_default_str();
    app.add_option("--n-max", cfg.n_max, "sweep-n largest dimension")->capture_default_str();
    app.add_option("--n-step", cfg.n_step, "sweep-n dimension step")->capture_default_str();
    app.add_option("--reps", cfg.reps, "sweep-n seeds per dimension")->capture_default_str();
    app.add_option("--sides", sides_str, "gmrf-bench lattice sides, comma separated");

    auto* sub_estimate =
        app.add_subcommand("estimate", "one log-determinant estimate as a CSV row");
    auto* sub_compare =
        app.add_subcommand("compare", "maxent/taylor/chebyshev across moment budgets");
    auto* sub_sweep_n =
        app.add_subcommand("sweep-n", "error percentiles across synthetic dimensions");
    auto* sub_gmrf_bench =
        app.add_subcommand("gmrf-bench", "exact vs entropic likelihood timings per lattice side");
    auto* sub_gmrf_sweep =
        app.add_subcommand("gmrf-sweep", "exact vs entropic likelihood over a kappa grid");
    for (CLI::App* sub :
         {sub_estimate, sub_compare, sub_sweep_n, sub_gmrf_bench, sub_gmrf_sweep})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (!synth_spec.empty()) detail::parse_synthetic_spec(synth_spec, cfg);
        if (!lattice_spec.empty()) detail::parse_lattice_spec(lattice_spec, cfg);
        cfg.kind = detail::probe_kind_from(probe_kind_str);
        cfg.has_exact = opt_exact->count() > 0;
        if (!sides_str.empty()) {
            cfg.sides.clear();
            std::size_t pos = 0;
            while (pos <= sides_str.size()) {
                const std::size_t comma = sides_str.find(',', pos);
                const std::string tok =
                    sides_str.substr(pos, comma == std::string::npos ? comma : comma - pos);
                if (tok.empty()) throw contract_error("--sides has an empty element");
                cfg.sides.push_back(static_cast<std::size_t>(std::stoll(tok)));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        }

        std::ofstream file;
        std::ostream* csv = &out;
        if (!cfg.out_path.empty()) {
            file.open(cfg.out_path);
            if (!file) throw contract_error("cannot open output file '" + cfg.out_path + "'");
            csv = &file;
        }

        if (app.got_subcommand(sub_estimate))
            detail::cmd_estimate(cfg, *csv);
        else if (app.got_subcommand(sub_compare))
            detail::cmd_compare(cfg, *csv);
        else if (app.got_subcommand(sub_sweep_n))
            detail::cmd_sweep_n(cfg, *csv);
        else if (app.got_subcommand(sub_gmrf_bench))
            detail::cmd_gmrf_bench(cfg, *csv);
        else
            detail::cmd_gmrf_sweep(cfg, *csv);
        return 0;
    } catch (const numerical_failure_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const not_positive_definite_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const iterative_solve_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const constraint_domain_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const undefined_value_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace cli
} // namespace melt
