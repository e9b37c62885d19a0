#include "batchq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include <CLI11.hpp>

#include "batchq/ct_limit.hpp"
#include "batchq/simulate.hpp"
#include "batchq/spec_file.hpp"
#include "batchq/steady_state.hpp"

namespace batchq {

int exit_status_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Unstable:
            return exit_status::unstable;
        case ErrorCode::RootCountMismatch:
        case ErrorCode::RepeatedRoot:
        case ErrorCode::SingularSystem:
        case ErrorCode::DegreeOverflow:
        case ErrorCode::PoleAtArgument:
            return exit_status::numerical;
        default:
            return exit_status::usage;
    }
}

std::string truncate_fixed(double x, int decimals) {
    if (x < 0.0 && x > -1e-12) x = 0.0;
    const double scale = std::pow(10.0, decimals);
    // The nudge keeps exact decimals such as 0.3 (stored as 0.29999...) intact.
    const double cut = std::trunc(x * scale + (x >= 0 ? 1e-6 : -1e-6)) / scale;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, cut);
    return buf;
}

double scaled_tvd_threshold(double slots) {
    return std::max(kDefaultTvdThreshold, kDefaultTvdThreshold * std::sqrt(1e7 / slots));
}

namespace {

enum class Format { Table, Csv, JsonLines };

std::string g17(double x) {
    if (!std::isfinite(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string json_num(double x) { return std::isfinite(x) ? g17(x) : "null"; }

std::string pad(const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

struct SolveOptions {
    std::string spec;
    std::string epochs = "both";
    std::optional<int> n_max;
    Format format = Format::Table;
};

struct SimOptions {
    std::string spec;
    std::optional<std::uint64_t> slots;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> warmup;
    std::optional<int> histogram_cap;
    std::optional<double> tvd_threshold;
    double z_threshold = kDefaultZThreshold;
    Format format = Format::Table;
};

void print_distributions(const EpochDist& pre, const EpochDist& arb, const SolveOptions& opt,
                         std::optional<int> spec_n_max, std::ostream& out) {
    const bool show_pre = opt.epochs != "arb";
    const bool show_arb = opt.epochs != "pre";
    const int n_max = opt.n_max ? *opt.n_max
                      : spec_n_max ? *spec_n_max
                                   : std::max(pre.cutoff(), arb.cutoff());

    const auto tp = pre.truncate(n_max);
    const auto ta = arb.truncate(n_max);
    std::vector<double> ratio(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        const double next = n < n_max ? tp.probs[n + 1] : pre(n + 1);
        ratio[n] = tp.probs[n] > 0.0 ? next / tp.probs[n] : std::nan("");
    }
    const double l_pre = pre.mean();
    const double l_arb = arb.mean();

    switch (opt.format) {
        case Format::Table: {
            std::string head = pad("n", 6);
            if (show_pre) head += pad("p_n^-", 12);
            if (show_arb) head += pad("p_n", 12);
            if (show_pre) head += pad("p_{n+1}^-/p_n^-", 18);
            out << head << '\n';
            for (int n = 0; n <= n_max; ++n) {
                std::string row = pad(std::to_string(n), 6);
                if (show_pre) row += pad(truncate_fixed(tp.probs[n], 6), 12);
                if (show_arb) row += pad(truncate_fixed(ta.probs[n], 6), 12);
                if (show_pre)
                    row += pad(std::isfinite(ratio[n]) ? truncate_fixed(ratio[n], 6) : "-", 18);
                out << row << '\n';
            }
            std::string sum = pad("sum", 6);
            if (show_pre) sum += pad(truncate_fixed(tp.captured, 6), 12);
            if (show_arb) sum += pad(truncate_fixed(ta.captured, 6), 12);
            out << sum << '\n';
            out << "mean  ";
            if (show_pre) out << " L^- = " << truncate_fixed(l_pre, 2);
            if (show_arb) out << " L = " << truncate_fixed(l_arb, 2);
            out << '\n';
            break;
        }
        case Format::Csv: {
            out << "n";
            if (show_pre) out << ",p_pre";
            if (show_arb) out << ",p_arb";
            if (show_pre) out << ",ratio_pre";
            out << '\n';
            for (int n = 0; n <= n_max; ++n) {
                out << n;
                if (show_pre) out << ',' << g17(tp.probs[n]);
                if (show_arb) out << ',' << g17(ta.probs[n]);
                if (show_pre) out << ',' << g17(ratio[n]);
                out << '\n';
            }
            out << "sum";
            if (show_pre) out << ',' << g17(tp.captured);
            if (show_arb) out << ',' << g17(ta.captured);
            if (show_pre) out << ',';
            out << "\nmean";
            if (show_pre) out << ',' << g17(l_pre);
            if (show_arb) out << ',' << g17(l_arb);
            if (show_pre) out << ',';
            out << '\n';
            break;
        }
        case Format::JsonLines: {
            for (int n = 0; n <= n_max; ++n) {
                out << "{\"n\":" << n;
                if (show_pre) out << ",\"p_pre\":" << json_num(tp.probs[n]);
                if (show_arb) out << ",\"p_arb\":" << json_num(ta.probs[n]);
                if (show_pre) out << ",\"ratio_pre\":" << json_num(ratio[n]);
                out << "}\n";
            }
            out << "{\"summary\":true";
            if (show_pre)
                out << ",\"sum_pre\":" << json_num(tp.captured) << ",\"mean_pre\":" << json_num(l_pre);
            if (show_arb)
                out << ",\"sum_arb\":" << json_num(ta.captured) << ",\"mean_arb\":" << json_num(l_arb);
            out << ",\"tail_rate\":" << json_num(pre.tail_rate()) << "}\n";
            break;
        }
    }
}

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
    const ModelSpec spec = load_spec(opt.spec);
    const QueueModel model = spec.discrete_model();
    const SteadySolution sol = solve_steady_state(model);
    for (const auto& w : sol.warnings) err << "warning: " << w << '\n';
    print_distributions(pre_arrival_dist(sol), arbitrary_dist(sol), opt, spec.n_max, out);
    return exit_status::ok;
}

int cmd_ct_solve(const SolveOptions& opt, std::ostream& out, std::ostream&) {
    const ModelSpec spec = load_spec(opt.spec);
    const CtModel model = spec.ct_model();
    const auto [pre, arb] = ct_distributions(model);
    print_distributions(pre, arb, opt, spec.n_max, out);
    return exit_status::ok;
}

SimConfig sim_config(const SimOptions& opt, const ModelSpec& spec,
                     const std::optional<SteadySolution>& sol) {
    SimConfig cfg;
    if (auto s = opt.slots ? opt.slots : spec.slots) cfg.slots = *s;
    if (auto s = opt.seed ? opt.seed : spec.seed) cfg.seed = *s;
    if (auto h = opt.histogram_cap ? opt.histogram_cap : spec.histogram_cap) cfg.histogram_cap = *h;
    if (auto w = opt.warmup ? opt.warmup : spec.warmup)
        cfg.warmup = *w;
    else {
        if (sol) cfg.warmup = default_warmup(sol->tail_rate);
        // short runs keep most of their slots
        cfg.warmup = std::min(cfg.warmup, cfg.slots / 10);
    }
    return cfg;
}

int cmd_simulate(const SimOptions& opt, std::ostream& out, std::ostream& err) {
    const ModelSpec spec = load_spec(opt.spec);
    const QueueModel model = spec.discrete_model();
    std::optional<SteadySolution> sol;
    try {
        sol = solve_steady_state(model);
    } catch (const Error& e) {
        // Only used to size the warm-up period.
        err << "note: no analytic tail rate (" << e.what() << "); default warm-up used\n";
    }
    const SimConfig cfg = sim_config(opt, spec, sol);
    const SimResult res = simulate(model, cfg);

    const int cap = res.arbitrary.cap();
    int last = 0;
    for (int n = 0; n < cap; ++n)
        if (res.arbitrary.counts[n] || res.pre_arrival.counts[n]) last = n;
    const double lambda_hat =
        static_cast<double>(res.arrivals) / static_cast<double>(res.observed_slots);

    switch (opt.format) {
        case Format::Table:
            out << pad("n", 6) << pad("p_n^-", 12) << pad("+-95%", 12) << pad("p_n", 12)
                << pad("+-95%", 12) << '\n';
            for (int n = 0; n <= last; ++n)
                out << pad(std::to_string(n), 6) << pad(truncate_fixed(res.pre_arrival.prob(n), 6), 12)
                    << pad(truncate_fixed(res.pre_arrival.half_width_95[n], 6), 12)
                    << pad(truncate_fixed(res.arbitrary.prob(n), 6), 12)
                    << pad(truncate_fixed(res.arbitrary.half_width_95[n], 6), 12) << '\n';
            out << pad(">=" + std::to_string(cap), 6)
                << pad(truncate_fixed(res.pre_arrival.prob(cap), 6), 12) << pad("", 12)
                << pad(truncate_fixed(res.arbitrary.prob(cap), 6), 12) << '\n';
            out << "slots = " << res.observed_slots << "  arrivals = " << res.arrivals
                << "  arrival rate = " << truncate_fixed(lambda_hat, 6) << '\n';
            break;
        case Format::Csv:
            out << "n,p_pre,hw_pre,p_arb,hw_arb\n";
            for (int n = 0; n <= cap; ++n)
                out << (n == cap ? "overflow" : std::to_string(n)) << ','
                    << g17(res.pre_arrival.prob(n)) << ',' << g17(res.pre_arrival.half_width_95[n])
                    << ',' << g17(res.arbitrary.prob(n)) << ','
                    << g17(res.arbitrary.half_width_95[n]) << '\n';
            break;
        case Format::JsonLines:
            for (int n = 0; n <= cap; ++n)
                out << "{\"n\":" << n << ",\"overflow\":" << (n == cap ? "true" : "false")
                    << ",\"count_pre\":" << res.pre_arrival.counts[n]
                    << ",\"p_pre\":" << json_num(res.pre_arrival.prob(n))
                    << ",\"hw_pre\":" << json_num(res.pre_arrival.half_width_95[n])
                    << ",\"count_arb\":" << res.arbitrary.counts[n]
                    << ",\"p_arb\":" << json_num(res.arbitrary.prob(n))
                    << ",\"hw_arb\":" << json_num(res.arbitrary.half_width_95[n]) << "}\n";
            out << "{\"summary\":true,\"slots\":" << res.observed_slots
                << ",\"arrivals\":" << res.arrivals << ",\"arrival_rate\":" << json_num(lambda_hat)
                << "}\n";
            break;
    }
    return exit_status::ok;
}

int cmd_compare(const SimOptions& opt, std::ostream& out, std::ostream& err) {
    const ModelSpec spec = load_spec(opt.spec);
    const QueueModel model = spec.discrete_model();
    const SteadySolution sol = solve_steady_state(model);
    for (const auto& w : sol.warnings) err << "warning: " << w << '\n';
    const SimConfig cfg = sim_config(opt, spec, sol);
    const SimResult res = simulate(model, cfg);

    const double tvd_thr =
        opt.tvd_threshold ? *opt.tvd_threshold : scaled_tvd_threshold(static_cast<double>(cfg.slots));
    const CompareReport reports[] = {
        compare(pre_arrival_dist(sol), res.pre_arrival, tvd_thr, opt.z_threshold),
        compare(arbitrary_dist(sol), res.arbitrary, tvd_thr, opt.z_threshold),
    };

    switch (opt.format) {
        case Format::Table:
            out << "slots = " << cfg.slots << "  seed = " << cfg.seed << '\n';
            out << pad("epoch", 12) << pad("TVD", 12) << pad("TVD limit", 12) << pad("max|z|", 10)
                << pad("at n", 6) << pad("z limit", 9) << pad("result", 8) << '\n';
            for (const auto& r : reports) {
                char z[32];
                std::snprintf(z, sizeof z, "%.2f", r.max_abs_z);
                char zl[32];
                std::snprintf(zl, sizeof zl, "%.2f", r.z_threshold);
                out << pad(to_string(r.kind), 12) << pad(truncate_fixed(r.tvd, 6), 12)
                    << pad(truncate_fixed(r.tvd_threshold, 6), 12) << pad(z, 10)
                    << pad(std::to_string(r.worst_bin), 6) << pad(zl, 9)
                    << pad(r.pass ? "pass" : "FAIL", 8) << '\n';
            }
            break;
        case Format::Csv:
            out << "epoch,tvd,tvd_threshold,max_abs_z,worst_bin,z_threshold,pass\n";
            for (const auto& r : reports)
                out << to_string(r.kind) << ',' << g17(r.tvd) << ',' << g17(r.tvd_threshold) << ','
                    << g17(r.max_abs_z) << ',' << r.worst_bin << ',' << g17(r.z_threshold) << ','
                    << (r.pass ? "true" : "false") << '\n';
            break;
        case Format::JsonLines:
            for (const auto& r : reports)
                out << "{\"epoch\":\"" << to_string(r.kind) << "\",\"tvd\":" << json_num(r.tvd)
                    << ",\"tvd_threshold\":" << json_num(r.tvd_threshold)
                    << ",\"max_abs_z\":" << json_num(r.max_abs_z) << ",\"worst_bin\":" << r.worst_bin
                    << ",\"z_threshold\":" << json_num(r.z_threshold)
                    << ",\"pass\":" << (r.pass ? "true" : "false") << "}\n";
            break;
    }
    const bool pass = std::all_of(std::begin(reports), std::end(reports),
                                  [](const CompareReport& r) { return r.pass; });
    if (!pass) err << "compare: simulation disagrees with the analytic solution\n";
    return pass ? exit_status::ok : exit_status::compare_failed;
}

int cmd_echo_spec(const std::string& path, std::ostream& out) {
    out << echo_spec(load_spec(path));
    return exit_status::ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steady-state queue content of discrete-time batch-arrival, batch-service queues"};
    app.name("batchq");
    app.require_subcommand(1);

    const std::map<std::string, Format> formats = {
        {"table", Format::Table}, {"csv", Format::Csv}, {"json-lines", Format::JsonLines}};

    SolveOptions solve_opt;
    SimOptions sim_opt;
    std::string echo_path;
    std::function<int()> action;

    auto add_solve_flags = [&](CLI::App* sub) {
        sub->add_option("spec", solve_opt.spec, "model specification file")->required();
        sub->add_option("--epochs", solve_opt.epochs, "pre | arb | both")
            ->check(CLI::IsMember({"pre", "arb", "both"}));
        sub->add_option("--n-max", solve_opt.n_max, "last queue length printed")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--format", solve_opt.format, "table | csv | json-lines")
            ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    };
    auto add_sim_flags = [&](CLI::App* sub) {
        sub->add_option("spec", sim_opt.spec, "model specification file")->required();
        sub->add_option("--slots", sim_opt.slots, "simulated slots after warm-up")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", sim_opt.seed, "random seed");
        sub->add_option("--warmup", sim_opt.warmup, "discarded warm-up slots");
        sub->add_option("--histogram-cap", sim_opt.histogram_cap, "last histogram bin before overflow")
            ->check(CLI::PositiveNumber);
        sub->add_option("--format", sim_opt.format, "table | csv | json-lines")
            ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    };

    auto* solve = app.add_subcommand("solve", "analytic distributions of a discrete-time model");
    add_solve_flags(solve);
    solve->callback([&] { action = [&] { return cmd_solve(solve_opt, out, err); }; });

    auto* ct = app.add_subcommand("ct-solve", "distributions of a continuous-time arrival model");
    add_solve_flags(ct);
    ct->callback([&] { action = [&] { return cmd_ct_solve(solve_opt, out, err); }; });

    auto* sim = app.add_subcommand("simulate", "empirical distributions by simulation");
    add_sim_flags(sim);
    sim->callback([&] { action = [&] { return cmd_simulate(sim_opt, out, err); }; });

    auto* cmp = app.add_subcommand("compare", "check the analytic solution against simulation");
    add_sim_flags(cmp);
    cmp->add_option("--tvd-threshold", sim_opt.tvd_threshold, "total variation limit")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--z-threshold", sim_opt.z_threshold, "per-bin |z| limit")
        ->check(CLI::PositiveNumber);
    cmp->callback([&] { action = [&] { return cmd_compare(sim_opt, out, err); }; });

    auto* echo = app.add_subcommand("echo-spec", "print the canonical form of a spec file");
    echo->add_option("spec", echo_path, "model specification file")->required();
    echo->callback([&] { action = [&] { return cmd_echo_spec(echo_path, out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_status::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_status::ok;
    } catch (const CLI::ParseError& e) {
        err << "batchq: " << e.what() << '\n';
        return exit_status::usage;
    }

    try {
        return action();
    } catch (const Error& e) {
        err << "batchq: " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_status_for(e.code());
    }
}

}  // namespace batchq
