#include "hmmpc/cli/commands.hpp"

#include "hmmpc/cli/config.hpp"
#include "hmmpc/error.hpp"
#include "hmmpc/netsim/trace_io.hpp"
#include "hmmpc/runtime/metrics.hpp"
#include "hmmpc/runtime/result_io.hpp"
#include "hmmpc/schmm/model_io.hpp"
#include "hmmpc/schmm/training.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace hmmpc::cli {
namespace fs = std::filesystem;

using netsim::format_number;

namespace {

// Numeric failures get their own exit code; everything else is the caller's input.
int exit_code_for(const Error& e) {
    if (dynamic_cast<const SynthesisError*>(&e) || dynamic_cast<const CertificateError*>(&e) ||
        dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const UnderflowError*>(&e)) {
        return kExitNumeric;
    }
    return kExitUsage;
}

void print_summary(const RunSummary& s, std::ostream& out) {
    out << "agents:                " << s.agents << '\n'
        << "steps:                 " << s.steps << " (" << format_number(s.steps * s.sample_period_ms / 1000.0)
        << " s)\n"
        << "final max |e_i|:       " << format_number(s.final_max_error) << '\n'
        << "final max ratio:       " << format_number(s.final_max_ratio) << '\n'
        << "final delta_max:       " << format_number(s.final_delta_max) << '\n'
        << "time to 1% threshold:  "
        << (s.time_to_threshold_s ? format_number(*s.time_to_threshold_s) + " s" : std::string("not reached")) << '\n'
        << "dropout rate:          " << format_number(s.dropout_rate) << " of " << s.packets << " packets\n"
        << "mean |pred - real|:    " << format_number(s.mean_delay_error_ms) << " ms\n";
}

}  // namespace

RunSummary summarize(const runtime::SimResult& r) {
    RunSummary s;
    s.agents = r.n_agents;
    s.steps = r.steps;
    s.sample_period_ms = r.sample_period_ms;
    const auto& last = r.error_norm.back();
    s.final_max_error = *std::max_element(last.begin(), last.end());
    s.final_delta_max = r.delta_max.back();
    const auto rep = runtime::consensus_report(r);
    s.final_max_ratio = rep.final_max_ratio;
    if (rep.settling_step) s.time_to_threshold_s = static_cast<double>(*rep.settling_step) * r.sample_period_ms / 1000.0;
    long dropped = 0;
    for (const auto& d : r.delays) dropped += d.dropped ? 1 : 0;
    s.packets = static_cast<long>(r.delays.size());
    s.dropout_rate = s.packets ? static_cast<double>(dropped) / static_cast<double>(s.packets) : 0.0;
    s.mean_delay_error_ms = runtime::mean_prediction_error(r);
    return s;
}

std::string format_summary_csv(const RunSummary& s) {
    std::ostringstream out;
    out << "agents,steps,sample_period_ms,final_max_error,final_max_ratio,final_delta_max,time_to_threshold_s,"
           "dropout_rate,mean_delay_error_ms,packets\n";
    out << s.agents << ',' << s.steps << ',' << format_number(s.sample_period_ms) << ','
        << format_number(s.final_max_error) << ',' << format_number(s.final_max_ratio) << ','
        << format_number(s.final_delta_max) << ','
        << (s.time_to_threshold_s ? format_number(*s.time_to_threshold_s) : std::string()) << ','
        << format_number(s.dropout_rate) << ',' << format_number(s.mean_delay_error_ms) << ',' << s.packets << '\n';
    return out.str();
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    try {
        if (a.out.empty()) throw ConfigError("--out", "output path required");
        const schmm::DelayTrace trace = netsim::load_trace(a.trace, a.mask);

        schmm::TrainOptions opt;
        opt.n_states = a.states;
        opt.n_mixtures = a.mixtures;
        opt.seed = a.seed;
        opt.em.max_iters = a.max_iters;
        opt.em.tol = a.tol;
        opt.em.bin_ms = a.bin_ms;
        const schmm::TrainResult res = schmm::train_model(trace, opt);

        for (std::size_t s = 0; s < res.starts.size(); ++s) {
            out << "start " << res.starts[s] << ": final log-likelihood " << format_number(res.final_log_likelihood[s])
                << '\n';
        }
        out << "kept start: " << res.best_start << '\n';
        const auto& ll = res.best.log_likelihood;
        for (std::size_t i = 0; i < ll.size(); ++i) out << "iter " << i << "  loglik " << format_number(ll[i]) << '\n';
        for (const auto& w : res.best.warnings) err << "warning: " << w << '\n';

        schmm::save_model(res.best.model, a.out);
        out << "model written to " << a.out.string() << '\n';
        if (!res.best.converged) {
            err << "warning: EM did not converge within " << a.max_iters << " iterations\n";
            return kExitNotConverged;
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

int cmd_simulate(const fs::path& config, const std::optional<fs::path>& output, std::ostream& out, std::ostream& err) {
    try {
        SimConfig cfg = load_config(config);
        if (output) cfg.output = *output;
        const runtime::Scenario scenario = build_scenario(cfg);
        const runtime::SimResult result = runtime::run_simulation(scenario);
        runtime::write_result(result, cfg.output);
        const RunSummary s = summarize(result);
        std::ofstream(cfg.output / "summary.csv", std::ios::binary) << format_summary_csv(s);
        print_summary(s, out);
        out << "results written to " << cfg.output.string() << '\n';
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err) {
    try {
        if (!fs::is_directory(dir)) throw Error("run directory " + dir.string() + " does not exist");
        const runtime::SimResult result = runtime::read_result(dir);
        const RunSummary s = summarize(result);
        std::ofstream(dir / "summary.csv", std::ios::binary) << format_summary_csv(s);
        print_summary(s, out);
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace hmmpc::cli
