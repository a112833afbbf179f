#include "commands.hpp"

#include "cheetah/harness.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cheetah::cli {

using nlohmann::json;

namespace {

Schedule parse_schedule(const std::string& s)
{
    if (s == "pa") {
        return Schedule::pa;
    }
    if (s == "ia") {
        return Schedule::ia;
    }
    throw InvalidGrid("schedule must be pa or ia, got '" + s + "'");
}

json point_json(const GridPoint& g, const HeParams& p)
{
    return {{"n", g.n},
            {"t_bits", g.t_bits},
            {"q_bits", g.q_bits},
            {"w_bits", g.w_bits},
            {"a_bits", g.a_bits},
            {"t", p.t.value()},
            {"q", p.q.value()},
            {"l_pt", p.l_pt()},
            {"l_ct", p.l_ct()}};
}

json counts_json(const OpCounts& c)
{
    return {{"he_mult", c.he_mult}, {"he_rotate", c.he_rotate}, {"he_add", c.he_add}, {"ntt", c.ntt},
            {"int_mults", c.int_mults}};
}

struct Tuned {
    GridPoint point;
    HeParams params;
    double budget_bits = 0;
};

Tuned tune_one(const LayerSpec& spec, const ParamGrid& grid, Schedule s, int min_t_bits, unsigned threads)
{
    TuneOptions opt;
    opt.schedule = s;
    opt.min_t_bits = min_t_bits;
    opt.threads = threads;
    const Exploration ex = explore(spec, grid, opt);
    const Candidate& c = select_optimal(ex.candidates);
    return {c.point, to_params(c.point), c.budget_bits};
}

// the same point with q at least `drop` bits smaller, for fault injection
HeParams shrink_q(const GridPoint& g, int drop)
{
    for (int qb = g.q_bits - drop; qb > g.t_bits; --qb) {
        GridPoint f = g;
        f.q_bits = static_cast<std::uint8_t>(qb);
        f.a_bits = static_cast<std::uint8_t>(std::min<int>(g.a_bits, qb));
        try {
            return to_params(f);
        } catch (const InvalidParams&) {
        }
    }
    throw InvalidParams("no smaller q for fault injection");
}

std::vector<std::size_t> pick_layers(const NetworkSpec& net, const std::vector<int>& wanted)
{
    std::vector<std::size_t> out;
    if (wanted.empty()) {
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            out.push_back(i);
        }
        return out;
    }
    for (int i : wanted) {
        if (i < 0 || static_cast<std::size_t>(i) >= net.layers.size()) {
            throw InvalidGrid("layer index " + std::to_string(i) + " out of range (network has " +
                              std::to_string(net.layers.size()) + " layers)");
        }
        out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

int node_nm(const std::string& s)
{
    std::string digits = s;
    if (digits.size() > 2 && digits.substr(digits.size() - 2) == "nm") {
        digits.resize(digits.size() - 2);
    }
    try {
        std::size_t used = 0;
        const int v = std::stoi(digits, &used);
        if (used == digits.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw UnknownNode("unknown technology node '" + s + "'");
}

SweepRange sweep(const std::string& text, const char* what)
{
    const BitRange r = parse_range(text, what);
    return SweepRange{r.lo, r.hi, true};
}

std::vector<LayerWork> network_work(const NetworkSpec& net, const ParamGrid& grid, unsigned threads)
{
    TuneOptions opt;
    opt.threads = threads;
    const TuningResult tuned = tune_network(net, grid, opt);
    std::vector<LayerWork> work;
    for (const auto& l : tuned.layers) {
        LayerWork w = layer_work(l.spec, l.params);
        w.name = l.name;
        work.push_back(std::move(w));
    }
    return work;
}

std::string out_dir(const std::string& requested)
{
    if (!requested.empty()) {
        return requested;
    }
    if (const char* env = std::getenv("CHEETAH_OUT_DIR")) {
        return env;
    }
    return ".";
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream os(path);
    if (!os || !(os << text)) {
        throw std::ios_base::failure("cannot write " + path.string());
    }
}

} // namespace

BitRange parse_range(const std::string& text, const char* what)
{
    const auto dots = text.find("..");
    try {
        std::size_t used = 0;
        if (dots == std::string::npos) {
            const int v = std::stoi(text, &used);
            if (used != text.size()) {
                throw std::invalid_argument(text);
            }
            return {v, v};
        }
        const std::string lo = text.substr(0, dots);
        const std::string hi = text.substr(dots + 2);
        const int a = std::stoi(lo, &used);
        if (used != lo.size()) {
            throw std::invalid_argument(text);
        }
        const int b = std::stoi(hi, &used);
        if (used != hi.size()) {
            throw std::invalid_argument(text);
        }
        return {a, b};
    } catch (const std::logic_error&) {
        throw InvalidGrid(std::string(what) + ": expected N or LO..HI, got '" + text + "'");
    }
}

std::vector<std::size_t> parse_list(const std::string& text, const char* what)
{
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            out.push_back(v);
        } catch (const std::logic_error&) {
            throw InvalidGrid(std::string(what) + ": bad entry '" + item + "'");
        }
    }
    if (out.empty()) {
        throw InvalidGrid(std::string(what) + ": empty list");
    }
    return out;
}

NetworkSpec load_model(const Common& c)
{
    if (!c.network_file.empty()) {
        return load_network(c.network_file);
    }
    return builtin(c.model);
}

ParamGrid make_grid(const Common& c)
{
    ParamGrid g;
    if (!c.n_list.empty()) {
        g.n_choices = parse_list(c.n_list, "--n");
    }
    if (!c.t_bits.empty()) {
        g.t_bits = parse_range(c.t_bits, "--t-bits");
    }
    if (!c.q_bits.empty()) {
        g.q_bits = parse_range(c.q_bits, "--q-bits");
    }
    if (!c.w_bits.empty()) {
        g.w_bits = parse_range(c.w_bits, "--w-bits");
    }
    if (!c.a_bits.empty()) {
        g.a_bits = parse_range(c.a_bits, "--a-bits");
    }
    g.enforce_security = !c.no_security;
    g.validate();
    return g;
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    write_file(path, text);
}

int cmd_tune(const TuneArgs& a)
{
    const NetworkSpec net = load_model(a.common);
    const ParamGrid grid = make_grid(a.common);
    TuneOptions opt;
    opt.schedule = parse_schedule(a.schedule);
    opt.threads = a.common.threads;
    const TuningResult r = tune_network(net, grid, opt);
    emit(to_json(r), a.common.out);
    return ok;
}

int cmd_run(const RunArgs& a)
{
    const NetworkSpec net = load_model(a.common);
    const ParamGrid grid = make_grid(a.common);
    std::vector<Schedule> schedules;
    if (a.schedule == "both") {
        schedules = {Schedule::pa, Schedule::ia};
    } else {
        schedules = {parse_schedule(a.schedule)};
    }
    if (a.trials < 0) {
        throw InvalidGrid("--trials must be >= 0");
    }
    if (a.full) {
        std::cerr << "warning: --full runs layers at their real size; this can take a long time\n";
    }
    // one parameter set per layer that both schedules can decrypt under
    const Schedule tune_for = schedules.size() > 1 ? Schedule::ia : schedules.front();

    json report;
    report["model"] = net.name;
    report["seed"] = a.common.seed;
    report["trials"] = a.trials;
    report["layers"] = json::array();
    std::size_t rows = 0;
    std::size_t wrong = 0;
    std::size_t count_errors = 0;
    bool pa_ge_ia = true;

    for (std::size_t li : pick_layers(net, a.layers)) {
        const NetLayer& layer = net.layers[li];
        const LayerSpec shape = a.full ? layer.spec : desk_shape(layer.spec, a.max_w, a.max_c, a.max_fc);
        const Tuned tuned = tune_one(shape, grid, tune_for, layer.plain_bits, a.common.threads);
        json lj;
        lj["index"] = li;
        lj["name"] = layer.name;
        lj["layer"] = layer.spec.describe();
        lj["executed"] = shape.describe();
        lj["params"] = point_json(tuned.point, tuned.params);
        for (Schedule s : schedules) {
            const NoiseEstimate e = noise_model(shape, tuned.params, s);
            lj["predicted"][to_string(s)] = {{"budget_bits", e.budget_bits},
                                             {"counts", counts_json(perf_model(shape, tuned.params, s))}};
        }
        lj["rows"] = json::array();
        if (a.trials > 0) {
            const LayerHarness h(shape, BfvContext::create(tuned.params), a.common.seed * 7919 + li);
            for (int trial = 0; trial < a.trials; ++trial) {
                const std::uint64_t seed = a.common.seed * 1000003 + li * 10007 + static_cast<std::uint64_t>(trial);
                Rng rng(seed);
                const u64 t = tuned.params.t.value();
                const auto x = random_plain(input_size(shape), t, rng);
                const auto w = random_plain(weight_size(shape), t, rng);
                double budget_pa = 0;
                double budget_ia = 0;
                for (Schedule s : schedules) {
                    const TrialOutcome o = h.run(s, x, w, seed + 1);
                    (s == Schedule::pa ? budget_pa : budget_ia) = o.measured_budget;
                    ++rows;
                    wrong += o.correct ? 0 : 1;
                    count_errors += o.counts_match() ? 0 : 1;
                    lj["rows"].push_back({{"trial", trial},
                                          {"schedule", to_string(s)},
                                          {"correct", o.correct},
                                          {"measured_budget", o.measured_budget},
                                          {"measured", {{"he_mult", o.measured.mult},
                                                        {"he_rotate", o.measured.rotate},
                                                        {"he_add", o.measured.add},
                                                        {"ntt", o.measured.ntt}}},
                                          {"traced", counts_json(o.traced)},
                                          {"model", counts_json(o.model)},
                                          {"counts_match", o.counts_match()},
                                          {"flag", o.correct ? "" : "decryption mismatch"}});
                }
                if (schedules.size() > 1 && budget_pa < budget_ia) {
                    pa_ge_ia = false;
                }
            }
        }
        report["layers"].push_back(std::move(lj));
    }
    report["summary"] = {{"rows", rows},
                         {"mismatches", wrong},
                         {"count_mismatches", count_errors},
                         {"pa_budget_ge_ia", schedules.size() > 1 ? json(pa_ge_ia) : json(nullptr)}};
    emit(report.dump(2) + "\n", a.common.out);
    if (wrong > 0 || count_errors > 0) {
        std::cerr << "run: " << wrong << " decryption mismatches, " << count_errors << " count mismatches\n";
        return validation_failed;
    }
    return ok;
}

int cmd_simulate(const SimulateArgs& a)
{
    const NetworkSpec net = load_model(a.common);
    const ParamGrid grid = make_grid(a.common);
    CostTable costs = CostTable::defaults();
    if (!a.costs_file.empty()) {
        std::ifstream in(a.costs_file);
        if (!in) {
            throw std::ios_base::failure("cannot open cost table " + a.costs_file);
        }
        std::stringstream ss;
        ss << in.rdbuf();
        costs = CostTable::from_json(ss.str());
    }
    AcceleratorConfig base;
    base.technology = technology_factor(40, node_nm(a.node));
    base.ntt_parallel_factor = a.ntt_parallel;
    base.io_bound = a.io_bound;
    base.io_bandwidth_gbps = a.bandwidth;
    const SweepRange pes = sweep(a.pes, "--pes");
    const SweepRange lanes = sweep(a.lanes, "--lanes");

    const std::vector<LayerWork> work = network_work(net, grid, a.common.threads);
    const std::vector<SimResult> front = dse(work, pes, lanes, costs, base, a.common.threads);
    if (front.empty()) {
        throw ConfigOutOfBounds("sweep ranges contain no configuration");
    }
    const SimResult& design = select_design(front);

    const std::filesystem::path dir = out_dir(a.common.out);
    std::filesystem::create_directories(dir);
    const auto csv = dir / (net.name + "_pareto.csv");
    const auto js = dir / (net.name + "_pareto.json");
    write_file(csv, to_csv(front));
    write_file(js, to_json(front));

    json summary;
    summary["model"] = net.name;
    summary["node"] = a.node;
    summary["frontier_points"] = front.size();
    summary["csv"] = csv.string();
    summary["json"] = js.string();
    summary["design"] = {{"num_pes", design.config.num_pes},
                         {"lanes_per_pe", design.config.lanes_per_pe},
                         {"latency_ms", design.latency_ms},
                         {"power_w", design.power_w},
                         {"area_mm2", design.area_mm2}};
    if (!a.cross.empty()) {
        Common other = a.common;
        other.model = a.cross;
        other.network_file.clear();
        const std::vector<LayerWork> other_work = network_work(load_model(other), grid, a.common.threads);
        const std::vector<SimResult> other_front = dse(other_work, pes, lanes, costs, base, a.common.threads);
        const AcceleratorConfig host = select_design(other_front).config;
        const CrossRun run = cross_model_run(work, host, costs, pes, lanes);
        summary["cross"] = {{"host_model", a.cross},
                            {"host_design", {{"num_pes", host.num_pes}, {"lanes_per_pe", host.lanes_per_pe}}},
                            {"latency_ms", run.result.latency_ms},
                            {"power_w", run.result.power_w},
                            {"reference",
                             {{"num_pes", run.reference.config.num_pes},
                              {"lanes_per_pe", run.reference.config.lanes_per_pe},
                              {"latency_ms", run.reference.latency_ms},
                              {"power_w", run.reference.power_w}}},
                            {"increase", run.increase}};
    }
    std::cout << summary.dump(2) << "\n";
    return ok;
}

int cmd_validate(const ValidateArgs& a)
{
    const NetworkSpec net = load_model(a.common);
    const ParamGrid grid = make_grid(a.common);
    if (a.trials < 1) {
        throw InvalidGrid("--trials must be >= 1");
    }
    json checks = json::array();
    std::size_t failed = 0;
    auto record = [&](std::size_t li, const std::string& name, const std::string& check, bool pass,
                      const std::string& detail) {
        failed += pass ? 0 : 1;
        checks.push_back({{"layer", li}, {"name", name}, {"check", check}, {"pass", pass}, {"detail", detail}});
    };

    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const NetLayer& layer = net.layers[li];
        const LayerSpec shape = desk_shape(layer.spec, a.max_w, a.max_c, a.max_fc);
        const std::uint64_t base_seed = a.common.seed * 1000003 + li * 10007;

        // noise soundness at the parameters the tuner picks for PA
        const Tuned pa = tune_one(shape, grid, Schedule::pa, layer.plain_bits, a.common.threads);
        const HeParams run_params = a.inject_fault ? shrink_q(pa.point, 10) : pa.params;
        {
            const LayerHarness h(shape, BfvContext::create(run_params), base_seed);
            int bad = 0;
            double low = 1e300;
            for (int trial = 0; trial < a.trials; ++trial) {
                const TrialOutcome o = h.run(Schedule::pa, base_seed + 2 + static_cast<std::uint64_t>(trial));
                bad += o.correct ? 0 : 1;
                low = std::min(low, o.measured_budget);
            }
            const double predicted = noise_model(shape, run_params, Schedule::pa).budget_bits;
            std::ostringstream d;
            d << bad << "/" << a.trials << " failures, predicted budget " << predicted << " bits, lowest measured "
              << low << " bits";
            record(li, layer.name, "noise_soundness", bad == 0, d.str());
            const bool tight = predicted < 5;
            record(li, layer.name, "budget_prediction", !tight || predicted <= low + 1,
                   tight ? "predicted <= measured + 1 bit" : "slack >= 5 bits, not checked");
        }

        // both schedules on shared data at IA-feasible parameters
        const Tuned ia = tune_one(shape, grid, Schedule::ia, layer.plain_bits, a.common.threads);
        const LayerHarness h(shape, BfvContext::create(ia.params), base_seed + 1);
        Rng rng(base_seed + 3);
        const auto x = random_plain(input_size(shape), ia.params.t.value(), rng);
        const auto w = random_plain(weight_size(shape), ia.params.t.value(), rng);
        const TrialOutcome opa = h.run(Schedule::pa, x, w, base_seed + 4);
        const TrialOutcome oia = h.run(Schedule::ia, x, w, base_seed + 4);
        record(li, layer.name, "count_fidelity", opa.counts_match() && oia.counts_match(),
               "trace, counters and model agree for both schedules");
        record(li, layer.name, "schedule_equivalence", opa.correct && oia.correct && opa.decoded == oia.decoded,
               "PA and IA decrypt to the plaintext result");
        record(li, layer.name, "pa_budget_advantage", opa.measured_budget >= oia.measured_budget,
               "PA " + std::to_string(opa.measured_budget) + " bits vs IA " + std::to_string(oia.measured_budget) +
                   " bits");
    }

    const bool all_ok = failed == 0;
    if (a.json) {
        json doc;
        doc["model"] = net.name;
        doc["seed"] = a.common.seed;
        doc["trials"] = a.trials;
        doc["fault_injected"] = a.inject_fault;
        doc["checks"] = checks;
        doc["passed"] = checks.size() - failed;
        doc["failed"] = failed;
        doc["ok"] = all_ok;
        emit(doc.dump(2) + "\n", a.common.out);
    } else {
        std::ostringstream os;
        for (const auto& c : checks) {
            os << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["layer"].get<std::size_t>() << ' '
               << c["name"].get<std::string>() << ' ' << c["check"].get<std::string>() << ": "
               << c["detail"].get<std::string>() << '\n';
        }
        os << (all_ok ? "OK " : "FAILED ") << (checks.size() - failed) << "/" << checks.size() << " checks passed\n";
        emit(os.str(), a.common.out);
    }
    return all_ok ? ok : validation_failed;
}

} // namespace cheetah::cli
