#include "cheetah/tuner.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace cheetah {

namespace {

std::mutex g_prime_mutex;
std::map<std::pair<std::size_t, int>, std::optional<Modulus>> g_primes;

std::optional<Modulus> cached_prime(std::size_t n, int bits)
{
    std::lock_guard lock(g_prime_mutex);
    auto key = std::make_pair(n, bits);
    auto it = g_primes.find(key);
    if (it != g_primes.end()) {
        return it->second;
    }
    std::optional<Modulus> p;
    try {
        p = generate_ntt_prime(bits, n);
    } catch (const std::exception&) {
        p = std::nullopt;
    }
    g_primes.emplace(key, p);
    return p;
}

int range_count(int lo, int hi) { return hi < lo ? 0 : hi - lo + 1; }

// candidate order: cheaper, then more budget, then smaller n, then smaller q
bool better(const Candidate& a, const Candidate& b)
{
    if (a.int_mults != b.int_mults) {
        return a.int_mults < b.int_mults;
    }
    if (a.budget_bits != b.budget_bits) {
        return a.budget_bits > b.budget_bits;
    }
    if (a.point.n != b.point.n) {
        return a.point.n < b.point.n;
    }
    return a.point.q_bits < b.point.q_bits;
}

unsigned worker_count(unsigned requested, std::size_t work)
{
    unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(work / 4096, 1)));
}

} // namespace

std::map<std::size_t, int> default_security_table()
{
    return {{1024, 27}, {2048, 54}, {4096, 109}, {8192, 218}, {16384, 438}, {32768, 881}};
}

bool security_floor(std::size_t n, int q_bits, const std::map<std::size_t, int>& table)
{
    if (q_bits <= 0) {
        return true;
    }
    auto it = table.upper_bound(n);
    if (it == table.begin()) {
        return false;
    }
    return q_bits <= std::prev(it)->second;
}

void ParamGrid::validate() const
{
    if (n_choices.empty()) {
        throw InvalidGrid("grid has no ring degrees");
    }
    for (std::size_t n : n_choices) {
        if (n < 4 || !std::has_single_bit(n)) {
            throw InvalidGrid("ring degree " + std::to_string(n) + " is not a power of two >= 4");
        }
    }
    const std::pair<const char*, BitRange> ranges[] = {{"t_bits", t_bits}, {"q_bits", q_bits}, {"w_bits", w_bits}, {"a_bits", a_bits}};
    for (const auto& [name, r] : ranges) {
        if (r.empty()) {
            throw InvalidGrid(std::string(name) + " range is empty");
        }
        if (r.lo < 1) {
            throw InvalidGrid(std::string(name) + " must start at 1 or more");
        }
    }
    if (q_bits.hi > 60 || t_bits.hi > 60) {
        throw InvalidGrid("moduli are limited to 60 bits");
    }
}

HeParams to_params(const GridPoint& g)
{
    auto t = cached_prime(g.n, g.t_bits);
    auto q = cached_prime(g.n, g.q_bits);
    if (!t || !q) {
        throw InvalidParams("no NTT-friendly prime for grid point");
    }
    HeParams p;
    p.n = g.n;
    p.t = *t;
    p.q = *q;
    p.w_dcmp = u64{1} << g.w_bits;
    p.a_dcmp = u64{1} << g.a_bits;
    p.validate();
    return p;
}

std::vector<GridPoint> enumerate_grid(const ParamGrid& grid, std::size_t* skipped)
{
    grid.validate();
    std::vector<GridPoint> out;
    std::size_t skip = 0;
    for (std::size_t n : grid.n_choices) {
        for (int tb = grid.t_bits.lo; tb <= grid.t_bits.hi; ++tb) {
            const int wn = range_count(grid.w_bits.lo, std::min(grid.w_bits.hi, tb));
            const bool t_ok = cached_prime(n, tb).has_value();
            for (int qb = grid.q_bits.lo; qb <= grid.q_bits.hi; ++qb) {
                const int an = range_count(grid.a_bits.lo, std::min(grid.a_bits.hi, qb));
                if (!t_ok || qb <= tb || !cached_prime(n, qb).has_value()) {
                    skip += static_cast<std::size_t>(wn) * static_cast<std::size_t>(an);
                    continue;
                }
                for (int wb = grid.w_bits.lo; wb <= std::min(grid.w_bits.hi, tb); ++wb) {
                    for (int ab = grid.a_bits.lo; ab <= std::min(grid.a_bits.hi, qb); ++ab) {
                        out.push_back(GridPoint{static_cast<std::uint32_t>(n), static_cast<std::uint8_t>(tb),
                                                static_cast<std::uint8_t>(qb), static_cast<std::uint8_t>(wb),
                                                static_cast<std::uint8_t>(ab)});
                    }
                }
            }
        }
    }
    if (skipped != nullptr) {
        *skipped = skip;
    }
    return out;
}

namespace {

std::vector<Candidate> evaluate(const LayerSpec& layer, const std::vector<GridPoint>& points, const ParamGrid& grid,
                                const TuneOptions& opt)
{
    // geometry and primes per ring degree, read-only inside the workers
    std::map<std::size_t, std::optional<LayerGeometry>> geos;
    std::map<std::pair<std::size_t, int>, Modulus> primes;
    for (const GridPoint& g : points) {
        if (!geos.count(g.n)) {
            try {
                geos[g.n] = plan_geometry(layer, g.n);
            } catch (const LayoutError&) {
                geos[g.n] = std::nullopt;
            }
        }
        for (int b : {int{g.t_bits}, int{g.q_bits}}) {
            if (!primes.count({g.n, b})) {
                primes.emplace(std::make_pair(std::size_t{g.n}, b), *cached_prime(g.n, b));
            }
        }
    }

    std::vector<Candidate> out(points.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const GridPoint& g = points[i];
            Candidate& c = out[i];
            c.point = g;
            c.secure = !grid.enforce_security || security_floor(g.n, g.q_bits, grid.security);
            const auto& geo = geos.at(g.n);
            if (!geo) {
                c.budget_bits = -std::numeric_limits<double>::infinity();
                c.int_mults = std::numeric_limits<u64>::max();
                continue;
            }
            HeParams p;
            p.n = g.n;
            p.t = primes.at({g.n, g.t_bits});
            p.q = primes.at({g.n, g.q_bits});
            p.w_dcmp = u64{1} << g.w_bits;
            p.a_dcmp = u64{1} << g.a_bits;
            const NoiseEstimate e = noise_model(*geo, p, opt.schedule);
            c.budget_bits = e.budget_bits;
            c.int_mults = perf_model(*geo, p, opt.schedule).int_mults;
            c.feasible = e.feasible && g.t_bits >= opt.min_t_bits;
        }
    };

    const unsigned threads = worker_count(opt.threads, points.size());
    if (threads <= 1) {
        work(0, points.size());
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (points.size() + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
        const std::size_t b = k * chunk;
        const std::size_t e = std::min(points.size(), b + chunk);
        if (b < e) {
            pool.emplace_back(work, b, e);
        }
    }
    for (auto& th : pool) {
        th.join();
    }
    return out;
}

} // namespace

Exploration explore(const LayerSpec& layer, const ParamGrid& grid, const TuneOptions& opt)
{
    layer.validate();
    Exploration ex;
    const std::vector<GridPoint> points = enumerate_grid(grid, &ex.skipped);
    ex.candidates = evaluate(layer, points, grid, opt);
    return ex;
}

const Candidate& select_optimal(const std::vector<Candidate>& candidates)
{
    const Candidate* best = nullptr;
    for (const Candidate& c : candidates) {
        if (c.admissible() && (best == nullptr || better(c, *best))) {
            best = &c;
        }
    }
    if (best == nullptr) {
        throw NoFeasibleParams("no feasible, security-admissible parameters among " +
                               std::to_string(candidates.size()) + " candidates");
    }
    return *best;
}

TuningResult tune_network(const NetworkSpec& net, const ParamGrid& grid, const TuneOptions& opt)
{
    if (net.layers.empty()) {
        throw std::invalid_argument("tune_network: empty network");
    }
    TuningResult res;
    res.network = net.name;
    res.schedule = opt.schedule;
    const std::vector<GridPoint> points = enumerate_grid(grid);
    res.points_per_layer = points.size();

    // network-wide totals for the fixed-parameter baseline
    std::vector<u64> totals(points.size(), 0);
    std::vector<char> usable(points.size(), 1);

    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const NetLayer& layer = net.layers[li];
        TuneOptions lo = opt;
        lo.min_t_bits = std::max(opt.min_t_bits, layer.plain_bits);
        const std::vector<Candidate> cands = evaluate(layer.spec, points, grid, lo);
        const Candidate* best = nullptr;
        try {
            best = &select_optimal(cands);
        } catch (const NoFeasibleParams& e) {
            throw NoFeasibleParams("layer " + std::to_string(li) + " (" + layer.name + "): " + e.what(), li);
        }
        LayerChoice ch;
        ch.name = layer.name;
        ch.spec = layer.spec;
        ch.point = best->point;
        ch.params = to_params(best->point);
        ch.budget_bits = best->budget_bits;
        ch.counts = perf_model(layer.spec, ch.params, opt.schedule);
        res.total_int_mults += ch.counts.int_mults;
        res.layers.push_back(std::move(ch));

        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!cands[i].admissible()) {
                usable[i] = 0;
            } else if (usable[i]) {
                totals[i] += cands[i].int_mults;
            }
        }
    }

    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!usable[i]) {
            continue;
        }
        if (!pick || totals[i] < totals[*pick] ||
            (totals[i] == totals[*pick] && (points[i].n < points[*pick].n ||
                                            (points[i].n == points[*pick].n && points[i].q_bits < points[*pick].q_bits)))) {
            pick = i;
        }
    }
    if (pick) {
        Baseline b;
        b.point = points[*pick];
        const HeParams p = to_params(b.point);
        for (const NetLayer& l : net.layers) {
            b.layer_int_mults.push_back(perf_model(l.spec, p, opt.schedule).int_mults);
            b.total_int_mults += b.layer_int_mults.back();
        }
        res.baseline = std::move(b);
    }
    return res;
}

TuningResult tune_network(const std::vector<LayerSpec>& layers, const ParamGrid& grid, const TuneOptions& opt)
{
    NetworkSpec net;
    net.name = "layers";
    for (std::size_t i = 0; i < layers.size(); ++i) {
        NetLayer l;
        l.name = "layer" + std::to_string(i);
        l.spec = layers[i];
        l.plain_bits = 1;
        net.layers.push_back(l);
    }
    return tune_network(net, grid, opt);
}

std::string to_json(const TuningResult& r)
{
    using nlohmann::json;
    auto point_json = [](const GridPoint& g) {
        return json{{"n", g.n}, {"t_bits", g.t_bits}, {"q_bits", g.q_bits}, {"w_bits", g.w_bits}, {"a_bits", g.a_bits}};
    };
    json doc;
    doc["network"] = r.network;
    doc["schedule"] = to_string(r.schedule);
    doc["points_per_layer"] = r.points_per_layer;
    doc["layers"] = json::array();
    for (std::size_t i = 0; i < r.layers.size(); ++i) {
        const LayerChoice& c = r.layers[i];
        json j;
        j["name"] = c.name;
        j["layer"] = c.spec.describe();
        j["params"] = point_json(c.point);
        j["params"]["t"] = c.params.t.value();
        j["params"]["q"] = c.params.q.value();
        j["params"]["l_pt"] = c.params.l_pt();
        j["params"]["l_ct"] = c.params.l_ct();
        j["budget_bits"] = c.budget_bits;
        j["feasible"] = c.budget_bits > 0;
        j["he_mult"] = c.counts.he_mult;
        j["he_rotate"] = c.counts.he_rotate;
        j["he_add"] = c.counts.he_add;
        j["ntt"] = c.counts.ntt;
        j["int_mults"] = c.counts.int_mults;
        if (r.baseline) {
            j["baseline_int_mults"] = r.baseline->layer_int_mults[i];
            j["speedup_vs_baseline"] =
                static_cast<double>(r.baseline->layer_int_mults[i]) / static_cast<double>(c.counts.int_mults);
        }
        doc["layers"].push_back(std::move(j));
    }
    doc["total_int_mults"] = r.total_int_mults;
    if (r.baseline) {
        doc["baseline"] = {{"params", point_json(r.baseline->point)}, {"total_int_mults", r.baseline->total_int_mults}};
    } else {
        doc["baseline"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

} // namespace cheetah
