#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "decay.hpp"
#include "json_io.hpp"
#include "last_exit.hpp"
#include "model.hpp"
#include "return_time.hpp"
#include "sim.hpp"

namespace repairchain::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kBadSpec = 2, kDomain = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

using io::Json;

inline Json verdict_json(const Verdict& v) {
    Json j;
    j["quantity"] = v.quantity;
    j["verdict"] = std::string(to_string(v.verdict));
    j["reason"] = v.reason;
    if (!v.partial_sums.empty()) {
        Json sums = Json::array();
        for (const auto& s : v.partial_sums) sums.push_back(Json{{"n", s.n}, {"value", s.value}});
        j["partial_sums"] = sums;
        if (v.block_ratio) j["block_ratio"] = *v.block_ratio;
    }
    return j;
}

inline Json report_json(const SimReport& r) {
    Json j;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j[r.kind == SimReport::Kind::Tau ? "cap" : "horizon"] = r.limit;
    Json hist = Json::object();
    for (const auto& [n, c] : r.hist) hist[std::to_string(n)] = c;
    j[r.kind == SimReport::Kind::Tau ? "tau_hist" : "L_hist"] = hist;
    j["censored"] = r.censored;
    return j;
}

inline void csv_row(std::ostream& out, std::size_t n, std::initializer_list<double> values) {
    out << n;
    for (double v : values) out << ',' << io::format_number(v);
    out << '\n';
}

struct Options {
    std::string model;
    std::size_t pmf_N = 0;
    std::size_t tilt_N = 50;
    std::size_t moments_N = 1024;
    std::size_t exit_N = 2048;
    int moment_k = 1;
    int exit_k = 0;
    std::optional<double> alpha;
    std::optional<double> x;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    std::uint64_t cap = 1000000;
    std::uint64_t horizon = 10000;
    bool csv = false;
    bool tau = false;
    bool exit = false;
    bool jumps = false;
    bool tilted = false;
    bool fit = false;
};

}  // namespace detail

/// Runs one command; argv excludes the program name.
inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    using detail::Json;
    detail::Options o;
    CLI::App app{"Analysis of repair-shop Markov chains p_ij = a_{j-(i-1)+}", "repairchain"};
    app.require_subcommand(1);

    const auto add_model = [&](CLI::App* sub) {
        sub->add_option("-m,--model", o.model, "model spec as inline JSON or @file")->required();
    };

    CLI::App* classify_cmd = app.add_subcommand("classify", "recurrence class and mean jump");
    add_model(classify_cmd);

    CLI::App* pmf_cmd = app.add_subcommand("pmf", "exact pmf of tau (default), of L (--exit) or of the jumps (--jumps)");
    add_model(pmf_cmd);
    pmf_cmd->add_option("-N", o.pmf_N, "largest n")->required();
    auto* tau_flag = pmf_cmd->add_flag("--tau", o.tau, "first-return time pmf with Green sequence");
    auto* exit_flag = pmf_cmd->add_flag("--exit", o.exit, "last-exit time pmf");
    auto* jumps_flag = pmf_cmd->add_flag("--jumps", o.jumps, "jump law a_n");
    tau_flag->excludes(exit_flag)->excludes(jumps_flag);
    exit_flag->excludes(jumps_flag);
    pmf_cmd->add_flag("--csv", o.csv, "CSV instead of JSON");

    CLI::App* decay_cmd = app.add_subcommand("decay", "critical point x0 and decay parameters R0, R1");
    add_model(decay_cmd);

    CLI::App* tilt_cmd = app.add_subcommand("tilt", "exponentially tilted jump law a_j x^j / G(x)");
    add_model(tilt_cmd);
    tilt_cmd->add_option("--x", o.x, "tilt point (default x0)");
    tilt_cmd->add_option("-N", o.tilt_N, "coefficients to print")->capture_default_str();
    tilt_cmd->add_flag("--csv", o.csv, "CSV instead of JSON");

    CLI::App* moments_cmd = app.add_subcommand("moments", "E(tau^k) for positive-recurrent chains");
    add_model(moments_cmd);
    moments_cmd->add_option("-k", o.moment_k, "moment order")->capture_default_str();
    moments_cmd->add_option("-N", o.moments_N, "terms of the numeric sum")->capture_default_str();

    CLI::App* finite_cmd = app.add_subcommand("finite", "finiteness verdicts for weighted moments");
    add_model(finite_cmd);
    finite_cmd->add_option("--alpha", o.alpha, "power of the weight");
    finite_cmd->add_option("-k", o.exit_k, "integer power of L (with --exit)")->capture_default_str();
    auto* tilted_flag = finite_cmd->add_flag("--tilted", o.tilted, "E(R1^tau tau^alpha; tau < inf)");
    auto* fexit_flag = finite_cmd->add_flag("--exit", o.exit, "E(R0^L L^k L^alpha) for transient chains");
    tilted_flag->excludes(fexit_flag);

    CLI::App* exit_cmd = app.add_subcommand("exit", "last-exit time distribution (transient chains)");
    add_model(exit_cmd);
    exit_cmd->add_option("-N", o.exit_N, "largest n")->capture_default_str();
    exit_cmd->add_flag("--csv", o.csv, "CSV instead of JSON");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo histograms of tau (default) or L (--exit)");
    add_model(sim_cmd);
    sim_cmd->add_option("--samples", o.samples, "number of paths")->capture_default_str();
    sim_cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
    sim_cmd->add_option("--cap", o.cap, "tau censoring cap")->capture_default_str();
    sim_cmd->add_option("--horizon", o.horizon, "last-exit horizon")->capture_default_str();
    sim_cmd->add_flag("--exit", o.exit, "simulate the last-exit time");

    CLI::App* asym_cmd = app.add_subcommand("asym", "exponent gamma with 1 - F(1-s) ~ s^gamma (null recurrent)");
    add_model(asym_cmd);
    asym_cmd->add_flag("--fit", o.fit, "least-squares fit instead of the analytic branch");

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }

    const auto emit = [&](const Json& j) { out << io::dump(j) << '\n'; };

    try {
        // option checks come before the model is read
        CLI::App* sub = app.get_subcommands().front();
        if ((sub == pmf_cmd && o.pmf_N < 1) || (sub == exit_cmd && o.exit_N < 1) ||
            (sub == tilt_cmd && o.tilt_N < 1) || (sub == moments_cmd && o.moments_N < 1))
            throw UsageError("-N must be >= 1");
        if (sub == moments_cmd && o.moment_k < 1) throw UsageError("-k must be >= 1");
        if (sub == finite_cmd) {
            if (!o.exit && !o.alpha) throw UsageError("--alpha is required");
            if (o.alpha && !(*o.alpha > 0.0)) throw UsageError("--alpha must be positive");
            if (o.exit && o.alpha && *o.alpha > 1.0) throw UsageError("--alpha must lie in (0,1] with --exit");
            if (o.exit && o.exit_k < 0) throw UsageError("-k must be >= 0");
            if (!o.exit && finite_cmd->count("-k") > 0) throw UsageError("-k applies only with --exit");
        }
        if (sub == sim_cmd && (o.cap < 1 || o.horizon < 1)) throw UsageError("--cap and --horizon must be >= 1");

        const JumpModel model = build_model(io::load_model_spec(o.model));

        if (sub == classify_cmd) {
            emit(Json{{"class", std::string(to_string(classify(model)))}, {"mu", model.mean()}});
        } else if (sub == pmf_cmd) {
            if (o.jumps) {
                if (o.csv) {
                    out << "n,a_n\n";
                    for (std::size_t n = 0; n <= o.pmf_N; ++n) detail::csv_row(out, n, {model.coefficient(n)});
                } else {
                    Json a = Json::array();
                    for (std::size_t n = 0; n <= o.pmf_N; ++n) a.push_back(model.coefficient(n));
                    emit(Json{{"N", o.pmf_N}, {"a", a}});
                }
            } else if (o.exit) {
                const ExitAnalysis ea = exit_pmf(model, o.pmf_N);
                if (o.csv) {
                    out << "n,P_L_n\n";
                    for (std::size_t n = 0; n <= o.pmf_N; ++n) detail::csv_row(out, n, {ea.pmf[n]});
                } else {
                    emit(Json{{"q_exit", ea.q_exit}, {"u_tail_bound", ea.u_tail_bound}, {"pmf", ea.pmf}});
                }
            } else {
                const ReturnAnalysis ra = return_pmf(model, o.pmf_N);
                if (o.csv) {
                    out << "n,f_n,u_n\n";
                    for (std::size_t n = 0; n <= o.pmf_N; ++n) detail::csv_row(out, n, {ra.f[n], ra.u[n]});
                } else {
                    emit(Json{{"N", o.pmf_N},
                              {"return_prob", ra.return_prob},
                              {"f", std::vector<double>(ra.f.begin() + 1, ra.f.end())},
                              {"u", ra.u}});
                }
            }
        } else if (sub == decay_cmd) {
            const DecayParams d = decay_params(model);
            Json j;
            j["x0"] = d.x0 ? Json(*d.x0) : Json(nullptr);
            j["R0"] = d.R0;
            j["R1"] = d.R1;
            j["F_at_R1"] = d.F_at_R1;
            j["case"] = std::string(to_string(d.case_label));
            emit(j);
        } else if (sub == tilt_cmd) {
            double x = 0.0;
            if (o.x) {
                x = *o.x;
            } else {
                const auto x0 = decay_params(model).x0;
                if (!x0) throw DomainError("no critical point x0; pass --x");
                x = *x0;
            }
            const JumpModel t = tilt(model, x);
            if (o.csv) {
                out << "n,a_n\n";
                for (std::size_t n = 0; n <= o.tilt_N; ++n) detail::csv_row(out, n, {t.coefficient(n)});
            } else {
                Json a = Json::array();
                for (std::size_t n = 0; n <= o.tilt_N; ++n) a.push_back(t.coefficient(n));
                emit(Json{{"x", x}, {"model", io::to_json(t.spec())}, {"mu", t.mean()},
                          {"class", std::string(to_string(classify(t)))}, {"a", a}});
            }
        } else if (sub == moments_cmd) {
            const MomentEstimate m = tau_moment(model, o.moment_k, o.moments_N);
            emit(Json{{"k", o.moment_k},
                      {"value", m.value},
                      {"tail_bound", m.tail_bound},
                      {"lower_bound_only", m.lower_bound_only},
                      {"method", m.method}});
        } else if (sub == finite_cmd) {
            Verdict v;
            if (o.exit) v = exit_weighted_verdict(model, o.exit_k, o.alpha);
            else if (o.tilted) v = tilted_tau_finite(model, *o.alpha);
            else v = tau_alpha_finite(model, *o.alpha);
            emit(detail::verdict_json(v));
        } else if (sub == exit_cmd) {
            const ExitAnalysis ea = exit_pmf(model, o.exit_N);
            if (o.csv) {
                out << "n,P_L_n\n";
                for (std::size_t n = 0; n <= o.exit_N; ++n) detail::csv_row(out, n, {ea.pmf[n]});
            } else {
                emit(Json{{"q_exit", ea.q_exit}, {"u_tail_bound", ea.u_tail_bound}, {"pmf", ea.pmf}});
            }
        } else if (sub == sim_cmd) {
            const SimReport r = o.exit ? sample_last_exit(model, o.seed, o.samples, o.horizon)
                                       : sample_tau(model, o.seed, o.samples, o.cap);
            emit(detail::report_json(r));
        } else if (sub == asym_cmd) {
            const AsymptoticExponent a =
                asymptotic_exponent(model, o.fit ? ExponentMethod::Fitted : ExponentMethod::Auto);
            emit(Json{{"gamma", a.gamma}, {"method", a.method}});
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidSpec& e) {
        err << e.what() << '\n';
        return kBadSpec;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kDomain;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    return kOk;
}

}  // namespace repairchain::cli
