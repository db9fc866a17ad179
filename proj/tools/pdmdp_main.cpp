// pdmdp — solve, compare, verify, generate, and benchmark discounted-cost
// MDPs with the primal-dual solver and the classical iterative variants.

#include "pdmdp/instance_io.hpp"
#include "pdmdp/mdp_core.hpp"
#include "pdmdp/pd_optimal.hpp"
#include "pdmdp/pd_variants.hpp"
#include "pdmdp/policy_iteration.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace {

using namespace pdmdp;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string vec_to_string(const Vec& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out + "]";
}

std::string policy_to_string(const Policy& mu) {
    std::string out = "[";
    for (std::size_t i = 0; i < mu.action.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(mu.action[i]);
    }
    return out + "]";
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PD_MDP_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 0;
}

MdpInstance load_with_gamma(const std::string& path,
                            const std::optional<double>& gamma_override) {
    MdpInstance inst = load(path);
    if (gamma_override) {
        inst.gamma = *gamma_override;
        inst.validate(1e-9);
    }
    return inst;
}

int run_solve(const std::string& file, const std::string& algo, double tol,
              long max_iter, const std::string& trace_path, bool assert_lemmas,
              const std::optional<double>& gamma_override) {
    const MdpInstance inst = load_with_gamma(file, gamma_override);

    ValueFunction v;
    Policy policy;
    long iterations = 0;

    if (algo == "pd") {
        SolverConfig config;
        config.tol = tol;
        config.assert_lemmas = assert_lemmas;
        if (max_iter > 0) config.max_iter = max_iter;
        const PdTrace trace = solve_pd(inst, config);
        v = trace.final_v;
        policy = trace.final_policy;
        iterations = trace.iterations();
        if (!trace_path.empty()) {
            std::ofstream out(trace_path, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot open " + trace_path);
            write_trace_jsonl(trace, out);
        }
    } else if (algo == "pi") {
        Policy init;
        init.action.assign(inst.n, 0);
        const PiResult result = sequential_pi(inst, init);
        v = result.v;
        policy = result.policy;
        iterations = result.iters;
    } else {
        Variant variant = Variant::vi;
        if (algo == "gs") variant = Variant::gs;
        if (algo == "gsj") variant = Variant::gsj;
        const long cap = max_iter > 0 ? max_iter : 100000;
        if (!trace_path.empty())
            std::cerr << "note: --trace applies to --algo pd only\n";
        const VariantResult result = run_variant(inst, variant, tol, cap);
        v = result.v;
        iterations = result.sweeps;
        policy = greedy_policy(v, inst);
    }

    std::cout << "algo: " << algo << "\n";
    std::cout << "iterations: " << iterations << "\n";
    std::cout << "v: " << vec_to_string(v) << "\n";
    std::cout << "policy: " << policy_to_string(policy) << "\n";
    return 0;
}

int run_compare(const std::string& file, const std::string& algos_csv,
                long sweeps, const std::optional<double>& gamma_override) {
    const MdpInstance inst = load_with_gamma(file, gamma_override);

    Policy init;
    init.action.assign(inst.n, 0);
    const Vec v_star = sequential_pi(inst, init).v;

    auto emit = [&](const std::string& algo, long iter, const Vec& v) {
        std::cout << algo << ',' << iter << ',' << fmt(v.sum()) << ','
                  << fmt(bellman_residual(v, inst)) << ','
                  << fmt((v - v_star).cwiseAbs().maxCoeff()) << '\n';
    };

    std::cout << "algo,iter,objective,residual,err_inf\n";
    std::stringstream algos(algos_csv);
    std::string algo;
    while (std::getline(algos, algo, ',')) {
        if (algo == "pd") {
            SolverConfig config;
            config.record_iterates = true;
            const PdTrace trace = solve_pd(inst, config);
            for (std::size_t k = 0; k < trace.iterates.size(); ++k)
                emit("pd", static_cast<long>(k + 1), trace.iterates[k]);
        } else if (algo == "vi" || algo == "gs" || algo == "gsj") {
            ValueFunction v = initial_feasible_point(inst);
            for (long k = 1; k <= sweeps; ++k) {
                if (algo == "vi")
                    v = bellman_backup(v, inst);
                else if (algo == "gs")
                    v = gs_sweep(v, inst);
                else
                    for (int i = 0; i < inst.n; ++i)
                        v = gsj_component_update(v, i, inst);
                emit(algo, k, v);
                if (bellman_residual(v, inst) <= 1e-12) break;
            }
        } else {
            throw ValidationError("unknown algorithm '" + algo + "'");
        }
    }
    return 0;
}

int run_verify(const std::string& file, const std::string& oracle) {
    const MdpInstance inst = load(file);

    const PdTrace trace = solve_pd(inst);
    Vec v_oracle;
    if (oracle == "pi") {
        Policy init;
        init.action.assign(inst.n, 0);
        v_oracle = sequential_pi(inst, init).v;
    } else if (oracle == "enumerate") {
        if (std::pow(static_cast<double>(inst.m),
                     static_cast<double>(inst.n)) > 1e6)
            throw ValidationError(
                "enumerate oracle refused: m^n exceeds 10^6 policies");
        v_oracle = enumerate_all_policies(inst).first;
    } else {
        throw ValidationError("unknown oracle '" + oracle + "'");
    }

    const double err = (trace.final_v - v_oracle).cwiseAbs().maxCoeff();

    // Compare greedy policies only on states without action ties.
    const Policy mu_pd = greedy_policy(trace.final_v, inst);
    const Policy mu_oracle = greedy_policy(v_oracle, inst);
    bool policies_agree = true;
    int disagree_state = -1;
    for (int i = 0; i < inst.n; ++i) {
        int ties = 0;
        const double best = q_value(inst, v_oracle, i, mu_oracle.action[i]);
        for (int u = 0; u < inst.m; ++u)
            if (q_value(inst, v_oracle, i, u) <= best + 1e-9) ++ties;
        if (ties > 1) continue;
        if (mu_pd.action[i] != mu_oracle.action[i]) {
            policies_agree = false;
            disagree_state = i;
        }
    }

    if (err <= 1e-7 && policies_agree) {
        std::cout << "PASS " << file << " err_inf=" << fmt(err)
                  << " iterations=" << trace.iterations() << "\n";
        return 0;
    }
    std::cout << "FAIL " << file << " err_inf=" << fmt(err) << "\n";
    std::cerr << "v_pd:     " << vec_to_string(trace.final_v) << "\n";
    std::cerr << "v_oracle: " << vec_to_string(v_oracle) << "\n";
    if (!policies_agree)
        std::cerr << "greedy policies disagree at state " << disagree_state
                  << "\n";
    return 3;
}

int run_gen(int n, int m, double gamma, std::uint64_t seed, double sparsity,
            std::string out_path) {
    GeneratorSpec spec;
    spec.n = n;
    spec.m = m;
    spec.gamma = gamma;
    spec.seed = seed;
    spec.sparsity = sparsity;
    const MdpInstance inst = random_mdp(spec);
    if (out_path.empty())
        out_path = "mdp_n" + std::to_string(n) + "_m" + std::to_string(m) +
                   "_seed" + std::to_string(seed) + ".json";
    save(inst, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

struct BenchTrial {
    int n;
    int m;
    double gamma;
    std::uint64_t seed;
};

int run_bench(const std::vector<int>& states, const std::vector<int>& actions,
              const std::vector<double>& gammas, long trials,
              std::uint64_t seed, int jobs) {
    std::vector<BenchTrial> plan;
    std::uint64_t index = 0;
    for (int n : states)
        for (int m : actions)
            for (double g : gammas)
                for (long t = 0; t < trials; ++t)
                    plan.push_back({n, m, g, seed + index++});

    std::vector<std::string> rows(plan.size());
    std::atomic<std::size_t> next{0};
    std::atomic<long> failures{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= plan.size()) return;
            const BenchTrial& trial = plan[k];
            std::ostringstream row;
            row << trial.n << ',' << trial.m << ',' << fmt(trial.gamma) << ','
                << trial.seed << ',';
            try {
                GeneratorSpec spec;
                spec.n = trial.n;
                spec.m = trial.m;
                spec.gamma = trial.gamma;
                spec.seed = trial.seed;
                const MdpInstance inst = random_mdp(spec);
                const PdTrace trace = solve_pd(inst);
                const BoundReport report = bound_report(inst, trace);
                row << report.measured_pd_iters << ',';
                for (std::size_t b = 0; b < report.per_block_pi_iters.size();
                     ++b)
                    row << (b ? ";" : "") << report.per_block_pi_iters[b];
                row << ',' << fmt(report.naive_cap) << ','
                    << fmt(report.scherrer) << ",ok";
            } catch (const std::exception& e) {
                row << ",,,," << e.what();
                failures.fetch_add(1);
            }
            rows[k] = row.str();
        }
    };

    const int workers = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::cout << "n,m,gamma,seed,pd_iters,blocks,naive_cap,scherrer_bound,status\n";
    for (const std::string& row : rows) std::cout << row << '\n';

    if (!plan.empty() && failures.load() == static_cast<long>(plan.size())) {
        std::cerr << "all trials failed\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"primal-dual and classical solvers for discounted-cost MDPs"};
    app.require_subcommand(1);

    // solve
    std::string solve_file, solve_algo = "pd", solve_trace;
    double solve_tol = 1e-8;
    long solve_max_iter = 0;
    bool solve_assert = false;
    std::optional<double> solve_gamma;
    auto* solve = app.add_subcommand("solve", "solve an instance file");
    solve->add_option("file", solve_file, "instance file")->required();
    solve->add_option("--algo", solve_algo, "pd|vi|gs|gsj|pi")
        ->check(CLI::IsMember({"pd", "vi", "gs", "gsj", "pi"}));
    solve->add_option("--tol", solve_tol, "Bellman residual target");
    solve->add_option("--max-iter", solve_max_iter, "iteration cap");
    solve->add_option("--trace", solve_trace, "JSON-lines trace path (pd)");
    solve->add_flag("--assert-lemmas", solve_assert,
                    "run per-iteration lemma checks (pd)");
    solve->add_option("--gamma", solve_gamma, "override the file's discount");

    // compare
    std::string cmp_file, cmp_algos = "pd,vi,gs,gsj";
    long cmp_sweeps = 30;
    std::optional<double> cmp_gamma;
    auto* compare = app.add_subcommand("compare",
                                       "per-iteration CSV for several algorithms");
    compare->add_option("file", cmp_file, "instance file")->required();
    compare->add_option("--algos", cmp_algos, "comma list of pd,vi,gs,gsj");
    compare->add_option("--sweeps", cmp_sweeps, "sweeps for iterative variants");
    compare->add_option("--gamma", cmp_gamma, "override the file's discount");

    // verify
    std::string verify_file, verify_oracle = "pi";
    auto* verify = app.add_subcommand("verify",
                                      "check the primal-dual result against an oracle");
    verify->add_option("file", verify_file, "instance file")->required();
    verify->add_option("--oracle", verify_oracle, "pi|enumerate")
        ->check(CLI::IsMember({"pi", "enumerate"}));

    // gen
    int gen_n = 0, gen_m = 0;
    double gen_gamma = 0.9, gen_sparsity = 1.0;
    std::uint64_t gen_seed = default_seed();
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "write a random instance file");
    gen->add_option("--states", gen_n, "state count")->required();
    gen->add_option("--actions", gen_m, "action count")->required();
    gen->add_option("--gamma", gen_gamma, "discount factor")->required();
    gen->add_option("--seed", gen_seed, "generator seed (default: PD_MDP_SEED)");
    gen->add_option("--sparsity", gen_sparsity, "expected row density");
    gen->add_option("--out", gen_out, "output path");

    // bench
    std::vector<int> bench_states, bench_actions;
    std::vector<double> bench_gammas;
    long bench_trials = 0;
    std::uint64_t bench_seed = default_seed();
    int bench_jobs = 1;
    auto* bench = app.add_subcommand("bench",
                                     "random campaign with bound reports (CSV)");
    bench->add_option("--states-list", bench_states, "state counts")
        ->required()
        ->delimiter(',');
    bench->add_option("--actions-list", bench_actions, "action counts")
        ->required()
        ->delimiter(',');
    bench->add_option("--gammas", bench_gammas, "discount factors")
        ->required()
        ->delimiter(',');
    bench->add_option("--trials", bench_trials, "trials per configuration")
        ->required();
    bench->add_option("--seed", bench_seed, "base seed (default: PD_MDP_SEED)");
    bench->add_option("--jobs", bench_jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed())
            return run_solve(solve_file, solve_algo, solve_tol, solve_max_iter,
                             solve_trace, solve_assert, solve_gamma);
        if (compare->parsed())
            return run_compare(cmp_file, cmp_algos, cmp_sweeps, cmp_gamma);
        if (verify->parsed()) return run_verify(verify_file, verify_oracle);
        if (gen->parsed())
            return run_gen(gen_n, gen_m, gen_gamma, gen_seed, gen_sparsity,
                           gen_out);
        if (bench->parsed())
            return run_bench(bench_states, bench_actions, bench_gammas,
                             bench_trials, bench_seed, bench_jobs);
    } catch (const NotConverged& e) {
        std::cerr << "not converged: " << e.what()
                  << " (residual " << fmt(e.residual) << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
