#include "cheetah/accelsim.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace cheetah {

using nlohmann::json;

namespace {

constexpr Kernel kAll[] = {Kernel::he_add, Kernel::he_mult, Kernel::swap,      Kernel::intt,
                           Kernel::decompose, Kernel::ntt, Kernel::simd_mult, Kernel::compose};

constexpr Kernel kRotateParts[] = {Kernel::swap, Kernel::decompose, Kernel::simd_mult, Kernel::compose};

std::size_t idx(Kernel k) { return static_cast<std::size_t>(k); }

u64 ceil_div(u64 a, u64 b) { return (a + b - 1) / b; }

int ceil_log2(u64 v) { return v <= 1 ? 0 : static_cast<int>(std::bit_width(v - 1)); }

int effective_ntt_units(int factor, int l_ct) { return factor <= 0 ? l_ct : std::min(factor, l_ct); }

double ct_bytes(std::size_t n) { return 2.0 * static_cast<double>(n) * 8.0; }

// one lane and its share of the reduction tree, static area
double lane_area(const CostTable& c, int ntt_units)
{
    double a = c[Kernel::he_mult].area_mm2 + c[Kernel::intt].area_mm2 + ntt_units * c[Kernel::ntt].area_mm2;
    for (Kernel k : kRotateParts) {
        a += c[k].area_mm2;
    }
    return a;
}

} // namespace

const char* to_string(Kernel k)
{
    switch (k) {
    case Kernel::he_add: return "HE_Add";
    case Kernel::he_mult: return "HE_Mult";
    case Kernel::swap: return "Swap";
    case Kernel::intt: return "INTT";
    case Kernel::decompose: return "Decompose";
    case Kernel::ntt: return "NTT";
    case Kernel::simd_mult: return "SIMDMult";
    case Kernel::compose: return "Compose";
    }
    return "?";
}

CostTable CostTable::defaults()
{
    CostTable t;
    t.reference_n = 4096;
    t[Kernel::he_add] = {0.64, 210, 0.68, 134};
    t[Kernel::he_mult] = {0.64, 309, 2.70, 198};
    // the rotation is measured as one block; its four stages share it evenly
    for (Kernel k : kRotateParts) {
        t[k] = {10.2 / 4, 146, 3.32 / 4, 1500.0 / 4};
    }
    t[Kernel::ntt] = {30.9, 61.1, 1.06, 1890};
    t[Kernel::intt] = t[Kernel::ntt];
    return t;
}

void CostTable::validate() const
{
    if (reference_n < 2 || !std::has_single_bit(reference_n)) {
        throw std::invalid_argument("cost table reference_n must be a power of two");
    }
    for (Kernel k : kAll) {
        const KernelCost& c = (*this)[k];
        if (!(c.latency_us > 0) || !(c.power_mw > 0) || !(c.area_mm2 > 0) || !(c.energy_nj > 0)) {
            throw std::invalid_argument(std::string("cost of ") + to_string(k) + " must be positive");
        }
        const double product = c.latency_us * c.power_mw; // nJ
        if (std::abs(product - c.energy_nj) > 0.1 * c.energy_nj) {
            throw std::invalid_argument(std::string("energy of ") + to_string(k) + " is not latency x power");
        }
    }
}

double CostTable::scale_factor(Kernel k, std::size_t n) const
{
    const double r = static_cast<double>(n) / static_cast<double>(reference_n);
    if (k == Kernel::ntt || k == Kernel::intt) {
        return r * std::log2(static_cast<double>(n)) / std::log2(static_cast<double>(reference_n));
    }
    return r;
}

CostTable CostTable::scaled(double power, double area) const
{
    CostTable t = *this;
    for (auto& c : t.kernels) {
        c.power_mw *= power;
        c.energy_nj *= power;
        c.area_mm2 *= area;
    }
    return t;
}

CostTable CostTable::from_json(const std::string& text)
{
    CostTable t = defaults();
    json doc = json::parse(text);
    if (doc.contains("reference_n")) {
        t.reference_n = doc["reference_n"].get<std::size_t>();
    }
    if (doc.contains("kernels")) {
        for (const auto& [name, v] : doc["kernels"].items()) {
            auto it = std::find_if(std::begin(kAll), std::end(kAll), [&](Kernel k) { return name == to_string(k); });
            if (it == std::end(kAll)) {
                throw std::invalid_argument("unknown kernel '" + name + "' in cost table");
            }
            KernelCost& c = t[*it];
            c.latency_us = v.value("latency_us", c.latency_us);
            c.power_mw = v.value("power_mw", c.power_mw);
            c.area_mm2 = v.value("area_mm2", c.area_mm2);
            c.energy_nj = v.value("energy_nj", c.energy_nj);
        }
    }
    t.validate();
    return t;
}

std::string CostTable::to_json() const
{
    json doc;
    doc["reference_n"] = reference_n;
    for (Kernel k : kAll) {
        const KernelCost& c = (*this)[k];
        doc["kernels"][to_string(k)] = {
            {"latency_us", c.latency_us}, {"power_mw", c.power_mw}, {"area_mm2", c.area_mm2}, {"energy_nj", c.energy_nj}};
    }
    return doc.dump(2) + "\n";
}

TechScale technology_factor(int from_nm, int to_nm)
{
    auto known = [](int nm) { return nm == 40 || nm == 16 || nm == 5; };
    if (!known(from_nm) || !known(to_nm)) {
        throw UnknownNode("unknown technology node pair " + std::to_string(from_nm) + "nm -> " + std::to_string(to_nm) +
                          "nm");
    }
    if (from_nm == to_nm) {
        return {};
    }
    static const std::map<std::pair<int, int>, TechScale> forward = {
        {{40, 16}, {0.2, 0.22}}, {{16, 5}, {0.32, 0.17}}, {{40, 5}, {0.056, 0.038}}};
    if (auto it = forward.find({from_nm, to_nm}); it != forward.end()) {
        return it->second;
    }
    const TechScale f = forward.at({to_nm, from_nm});
    return {1.0 / f.power, 1.0 / f.area};
}

void AcceleratorConfig::validate() const
{
    if (num_pes < 2 || num_pes > 1024) {
        throw ConfigOutOfBounds("num_pes " + std::to_string(num_pes) + " outside [2, 1024]");
    }
    if (lanes_per_pe < 4 || lanes_per_pe > 8192) {
        throw ConfigOutOfBounds("lanes_per_pe " + std::to_string(lanes_per_pe) + " outside [4, 8192]");
    }
    if (ntt_parallel_factor < 0) {
        throw ConfigOutOfBounds("ntt_parallel_factor must be >= 0");
    }
    if (!(technology.power > 0) || !(technology.area > 0)) {
        throw ConfigOutOfBounds("technology factors must be positive");
    }
    if (!(io_bandwidth_gbps > 0)) {
        throw ConfigOutOfBounds("io bandwidth must be positive");
    }
}

LayerWork layer_work(const LayerSpec& layer, const HeParams& params, Schedule schedule)
{
    const LayerGeometry geo = plan_geometry(layer, params.n);
    const OpCounts counts = perf_model(geo, params, schedule);
    LayerWork w;
    w.name = layer.describe();
    w.n = params.n;
    w.l_ct = params.l_ct();
    w.output_cts = geo.out_cts;
    w.input_cts = geo.in_cts;
    w.partials_per_output_ct = ceil_div(counts.he_mult, geo.out_cts);
    w.reduction_depth = ceil_log2(w.partials_per_output_ct);
    w.rotates = counts.he_rotate > 0;
    return w;
}

LaneTimes lane_breakdown(std::size_t n, int l_ct, bool rotates, int ntt_parallel_factor, const CostTable& costs)
{
    LaneTimes t;
    auto put = [&](Kernel k, double times) {
        t.us[idx(k)] += times * costs[k].latency_us * costs.scale_factor(k, n);
    };
    put(Kernel::he_mult, 1);
    if (rotates) {
        const int units = effective_ntt_units(ntt_parallel_factor, l_ct);
        put(Kernel::swap, 1);
        put(Kernel::intt, 1);
        put(Kernel::decompose, 1);
        put(Kernel::ntt, static_cast<double>(ceil_div(static_cast<u64>(l_ct), static_cast<u64>(units))));
        put(Kernel::simd_mult, 1);
        put(Kernel::compose, 1);
    }
    for (double v : t.us) {
        t.total += v;
    }
    return t;
}

double lane_latency(const HeParams& params, const CostTable& costs, int ntt_parallel_factor, bool rotates)
{
    return lane_breakdown(params.n, params.l_ct(), rotates, ntt_parallel_factor, costs).total;
}

double SimResult::rotate_ms() const
{
    double s = 0;
    for (Kernel k : kRotateParts) {
        s += kernel_ms[idx(k)];
    }
    return s;
}

double SimResult::ntt_ms() const { return kernel_ms[idx(Kernel::ntt)] + kernel_ms[idx(Kernel::intt)]; }

SimResult simulate(const std::vector<LayerWork>& network, const AcceleratorConfig& config, const CostTable& costs)
{
    config.validate();
    SimResult r;
    r.config = config;
    const u64 pes = static_cast<u64>(config.num_pes);
    const u64 lanes = static_cast<u64>(config.lanes_per_pe);
    int max_l_ct = 1;

    for (const LayerWork& w : network) {
        if (w.rotates) {
            max_l_ct = std::max(max_l_ct, w.l_ct);
        }
        const LaneTimes lane = lane_breakdown(w.n, w.l_ct, w.rotates, config.ntt_parallel_factor, costs);
        const double add_us = costs[Kernel::he_add].latency_us * costs.scale_factor(Kernel::he_add, w.n);
        const u64 waves = ceil_div(w.output_cts, pes);
        const u64 rounds = waves * ceil_div(w.partials_per_output_ct, lanes);

        LayerSim ls;
        ls.name = w.name;
        double us = static_cast<double>(rounds) * lane.total + static_cast<double>(waves) * w.reduction_depth * add_us;
        for (std::size_t k = 0; k < kKernelCount; ++k) {
            r.kernel_ms[k] += static_cast<double>(rounds) * lane.us[k] / 1000.0;
        }
        r.kernel_ms[idx(Kernel::he_add)] += static_cast<double>(waves) * w.reduction_depth * add_us / 1000.0;

        // lanes of a busy PE run in lockstep, so a partly filled round still switches every lane;
        // a PE without an output ct in the last wave is gated
        ls.lane_invocations = w.output_cts * w.partials_per_output_ct;
        const u64 slots = w.output_cts * ceil_div(w.partials_per_output_ct, lanes) * lanes;
        double lane_nj = costs[Kernel::he_mult].energy_nj * costs.scale_factor(Kernel::he_mult, w.n);
        if (w.rotates) {
            for (Kernel k : kRotateParts) {
                lane_nj += costs[k].energy_nj * costs.scale_factor(k, w.n);
            }
            lane_nj += costs[Kernel::intt].energy_nj * costs.scale_factor(Kernel::intt, w.n);
            lane_nj += w.l_ct * costs[Kernel::ntt].energy_nj * costs.scale_factor(Kernel::ntt, w.n);
        }
        const double adds = static_cast<double>(slots - w.output_cts);
        const double nj = static_cast<double>(slots) * lane_nj +
                          adds * costs[Kernel::he_add].energy_nj * costs.scale_factor(Kernel::he_add, w.n);
        ls.energy_mj = nj * 1e-6 * config.technology.power;

        // weights sit in the per-PE SRAM; only activations cross the interface
        const double bytes = static_cast<double>(w.input_cts + w.output_cts) * ct_bytes(w.n);
        const double io_us = bytes / (config.io_bandwidth_gbps * 1e3);
        if (config.io_bound && io_us > us) {
            us = io_us; // stall time is not attributed to a kernel
        }
        ls.io_utilization = us > 0 ? std::min(1.0, io_us / us) : 0;
        ls.latency_ms = us / 1000.0;

        r.latency_ms += ls.latency_ms;
        r.energy_mj += ls.energy_mj;
        r.lane_invocations += ls.lane_invocations;
        r.io_utilization = std::max(r.io_utilization, ls.io_utilization);
        r.layers.push_back(std::move(ls));
    }

    const int units = effective_ntt_units(config.ntt_parallel_factor, max_l_ct);
    const double pe_area = static_cast<double>(lanes) * lane_area(costs, units) +
                           static_cast<double>(lanes - 1) * costs[Kernel::he_add].area_mm2;
    r.area_mm2 = static_cast<double>(pes) * pe_area * config.technology.area;
    r.power_w = r.latency_ms > 0 ? r.energy_mj / r.latency_ms : 0;
    return r;
}

std::vector<int> SweepRange::values() const
{
    std::vector<int> v;
    if (pow2) {
        for (long x = 1; x <= hi; x *= 2) {
            if (x >= lo) {
                v.push_back(static_cast<int>(x));
            }
        }
    } else {
        for (int x = lo; x <= hi; ++x) {
            v.push_back(x);
        }
    }
    return v;
}

std::vector<SimResult> pareto_front(std::vector<SimResult> points)
{
    std::stable_sort(points.begin(), points.end(), [](const SimResult& a, const SimResult& b) {
        if (a.latency_ms != b.latency_ms) {
            return a.latency_ms < b.latency_ms;
        }
        return a.power_w < b.power_w;
    });
    std::vector<SimResult> front;
    for (auto& p : points) {
        // equal latency sorts by power, so a strict power drop also means strictly slower
        if (front.empty() || p.power_w < front.back().power_w) {
            front.push_back(std::move(p));
        }
    }
    return front;
}

std::vector<SimResult> dse(const std::vector<LayerWork>& network, const SweepRange& pes, const SweepRange& lanes,
                           const CostTable& costs, const AcceleratorConfig& base, unsigned threads)
{
    std::vector<AcceleratorConfig> configs;
    for (int p : pes.values()) {
        for (int l : lanes.values()) {
            AcceleratorConfig c = base;
            c.num_pes = p;
            c.lanes_per_pe = l;
            c.validate();
            configs.push_back(c);
        }
    }
    std::vector<SimResult> all(configs.size());
    const unsigned t = std::max(1u, std::min<unsigned>(threads != 0 ? threads : std::thread::hardware_concurrency(),
                                                       static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
            for (std::size_t i = k; i < configs.size(); i += t) {
                all[i] = simulate(network, configs[i], costs);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    return pareto_front(std::move(all));
}

const SimResult& select_design(const std::vector<SimResult>& front)
{
    if (front.empty()) {
        throw std::invalid_argument("select_design: empty frontier");
    }
    const SimResult* best = &front.front();
    for (const SimResult& p : front) {
        if (p.energy_mj * p.latency_ms < best->energy_mj * best->latency_ms) {
            best = &p;
        }
    }
    return *best;
}

CrossRun cross_model_run(const std::vector<LayerWork>& network, const AcceleratorConfig& config,
                         const CostTable& costs, const SweepRange& pes, const SweepRange& lanes)
{
    CrossRun out;
    out.result = simulate(network, config, costs);
    const std::vector<SimResult> front = dse(network, pes, lanes, costs, config);
    // frontier power falls as latency grows; take the fastest point that fits the power
    const SimResult* ref = &front.back();
    for (const SimResult& p : front) {
        if (p.power_w <= out.result.power_w * (1 + 1e-12)) {
            ref = &p;
            break;
        }
    }
    out.reference = *ref;
    out.increase = out.result.latency_ms / out.reference.latency_ms - 1.0;
    return out;
}

SimResult scale_technology(const SimResult& r, int from_nm, int to_nm)
{
    const TechScale f = technology_factor(from_nm, to_nm);
    SimResult s = r;
    s.power_w *= f.power;
    s.energy_mj *= f.power;
    s.area_mm2 *= f.area;
    for (auto& l : s.layers) {
        l.energy_mj *= f.power;
    }
    s.config.technology.power *= f.power;
    s.config.technology.area *= f.area;
    return s;
}

namespace {

json result_json(const SimResult& r)
{
    json j;
    j["num_pes"] = r.config.num_pes;
    j["lanes_per_pe"] = r.config.lanes_per_pe;
    j["ntt_parallel_factor"] = r.config.ntt_parallel_factor;
    j["latency_ms"] = r.latency_ms;
    j["energy_mj"] = r.energy_mj;
    j["power_w"] = r.power_w;
    j["area_mm2"] = r.area_mm2;
    j["io_utilization"] = r.io_utilization;
    j["lane_invocations"] = r.lane_invocations;
    for (Kernel k : kAll) {
        j["kernel_ms"][to_string(k)] = r.kernel_ms[idx(k)];
    }
    j["kernel_ms"]["HE_Rotate"] = r.rotate_ms();
    j["kernel_ms"]["NTT_total"] = r.ntt_ms();
    j["layers"] = json::array();
    for (const auto& l : r.layers) {
        j["layers"].push_back({{"name", l.name},
                               {"latency_ms", l.latency_ms},
                               {"energy_mj", l.energy_mj},
                               {"lane_invocations", l.lane_invocations},
                               {"io_utilization", l.io_utilization}});
    }
    return j;
}

} // namespace

std::string to_json(const SimResult& r) { return result_json(r).dump(2) + "\n"; }

std::string to_json(const std::vector<SimResult>& rs)
{
    json a = json::array();
    for (const auto& r : rs) {
        a.push_back(result_json(r));
    }
    return a.dump(2) + "\n";
}

std::string to_csv(const std::vector<SimResult>& rs)
{
    std::ostringstream os;
    os << "num_pes,lanes_per_pe,latency_ms,power_w,area_mm2,energy_mj,io_utilization,ntt_ms,rotate_ms\n";
    for (const auto& r : rs) {
        os << r.config.num_pes << ',' << r.config.lanes_per_pe << ',' << r.latency_ms << ',' << r.power_w << ','
           << r.area_mm2 << ',' << r.energy_mj << ',' << r.io_utilization << ',' << r.ntt_ms() << ',' << r.rotate_ms()
           << '\n';
    }
    return os.str();
}

} // namespace cheetah
