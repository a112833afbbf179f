// End-to-end acceptance checks. Prints one line per criterion:
//   criterion N: PASS|FAIL  <summary>
// followed by indented detail lines. Arguments select criteria (default 1-8);
// the exit code is nonzero when any selected criterion fails.

#include "cheetah/accelsim.hpp"
#include "cheetah/harness.hpp"
#include "cheetah/modarith.hpp"
#include "cheetah/netdesc.hpp"
#include "cheetah/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace cheetah;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void detail(const std::string& s) { std::cout << "    " << s << "\n"; }

struct Tuned {
    GridPoint point;
    HeParams params;
    double budget_bits = 0;
    u64 int_mults = 0;
};

Tuned tune_layer(const LayerSpec& l, Schedule s, int min_t_bits = 0)
{
    TuneOptions opt;
    opt.schedule = s;
    opt.min_t_bits = min_t_bits;
    const Exploration ex = explore(l, ParamGrid{}, opt);
    const Candidate& c = select_optimal(ex.candidates);
    return {c.point, to_params(c.point), c.budget_bits, c.int_mults};
}

LayerSpec random_conv(Rng& rng)
{
    std::uniform_int_distribution<int> w(1, 8);
    std::uniform_int_distribution<int> c(1, 4);
    std::bernoulli_distribution three(0.5);
    const int width = w(rng);
    const int f = (width >= 3 && three(rng)) ? 3 : 1;
    const int ci = c(rng);
    return LayerSpec::cnn(width, f, ci, c(rng));
}

LayerSpec random_fc(Rng& rng)
{
    std::uniform_int_distribution<int> d(1, 128);
    const int ni = d(rng);
    return LayerSpec::fc(ni, d(rng));
}

std::vector<LayerSpec> random_layers(std::uint64_t seed, int convs, int fcs)
{
    Rng rng(seed);
    std::vector<LayerSpec> out;
    for (int i = 0; i < convs; ++i) {
        out.push_back(random_conv(rng));
    }
    for (int i = 0; i < fcs; ++i) {
        out.push_back(random_fc(rng));
    }
    return out;
}

// ------------------------------------------------------------------ 1

bool homomorphic_correctness()
{
    const auto t0 = Clock::now();
    const std::vector<LayerSpec> layers = random_layers(101, 100, 100);
    int trials = 0;
    int mismatches = 0;
    std::map<std::size_t, int> by_n;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        for (Schedule s : {Schedule::pa, Schedule::ia}) {
            const Tuned tuned = tune_layer(layers[i], s);
            const LayerHarness h(layers[i], BfvContext::create(tuned.params), 7000 + i);
            const TrialOutcome o = h.run(s, 9000 + 2 * i + (s == Schedule::ia ? 1 : 0));
            ++trials;
            ++by_n[tuned.params.n];
            if (!o.correct) {
                ++mismatches;
                detail("mismatch: " + layers[i].describe() + " under " + to_string(s));
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = mismatches == 0 && secs <= 600;
    std::ostringstream s;
    s << "criterion 1: " << (pass ? "PASS" : "FAIL") << "  " << mismatches << " mismatches in " << trials
      << " encrypted runs (100 conv + 100 fc layers, PA and IA each at their tuned parameters), " << std::fixed
      << std::setprecision(1) << secs << " s";
    std::cout << s.str() << "\n";
    for (const auto& [n, k] : by_n) {
        detail("tuned n=" + std::to_string(n) + ": " + std::to_string(k) + " runs");
    }
    return pass;
}

// ------------------------------------------------------------------ 2

struct CountCase {
    LayerSpec layer;
    HeParams params;
};

bool count_fidelity()
{
    // power-of-two shapes whose channels fill their ciphertexts, so the table's packing assumptions hold
    const HeParams p256 = HeParams::from_bits(256, 13, 60, 13, 8);
    const HeParams p256_dcmp = HeParams::from_bits(256, 17, 60, 6, 20);
    const HeParams p1024 = HeParams::from_bits(1024, 17, 60, 9, 8);
    const std::vector<CountCase> cases = {
        {LayerSpec::cnn(8, 3, 8, 8), p256},        // n > w^2, four channels per ct
        {LayerSpec::cnn(16, 3, 4, 4), p256},       // n = w^2
        {LayerSpec::cnn(16, 3, 4, 2), p256_dcmp},  // n = w^2, l_pt > 1
        {LayerSpec::cnn(8, 1, 16, 16), p1024},     // pointwise
        {LayerSpec::cnn(32, 3, 2, 2), p256},       // n < w^2
        {LayerSpec::cnn(32, 3, 1, 2), p256_dcmp},  // n < w^2, l_pt > 1
        {LayerSpec::cnn(32, 1, 2, 2), p256},       // n < w^2, pointwise
        {LayerSpec::fc(128, 16), p256},            // n >= n_i, n_o
        {LayerSpec::fc(256, 256), p256_dcmp},      // n = n_i = n_o, l_pt > 1
        {LayerSpec::fc(128, 512), p256},           // n >= n_i, n < n_o
        {LayerSpec::fc(512, 16), p256},            // n < n_i, n >= n_o
        {LayerSpec::fc(512, 1024), p256},          // n < n_i, n_o
        {LayerSpec::fc(512, 512), p256_dcmp},      // n < n_i, n_o, l_pt > 1
    };

    int mult_ok = 0;
    int rot_ok = 0;
    int rot_with_skips = 0;
    int exact_ok = 0;
    int correct = 0;
    std::map<LayoutCase, int> covered;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& [layer, params] = cases[i];
        const LayerHarness h(layer, BfvContext::create(params), 300 + i);
        const LayerGeometry& geo = h.setup().geo;
        ++covered[geo.layout];
        const OpCounts table = closed_form_counts(layer, params);
        bool exact = true;
        bool right = true;
        OpCounts pa_trace;
        for (Schedule s : {Schedule::pa, Schedule::ia}) {
            const TrialOutcome o = h.run(s, 500 + i);
            exact = exact && o.counts_match();
            right = right && o.correct;
            if (s == Schedule::pa) {
                pa_trace = o.traced;
            }
        }
        const bool m = pa_trace.he_mult == table.he_mult;
        const bool r = pa_trace.he_rotate == table.he_rotate;
        const bool r_skips = pa_trace.he_rotate + geo.unrotated_diagonals == table.he_rotate;
        mult_ok += m ? 1 : 0;
        rot_ok += r ? 1 : 0;
        rot_with_skips += (r || r_skips) ? 1 : 0;
        exact_ok += exact ? 1 : 0;
        correct += right ? 1 : 0;
        std::ostringstream d;
        d << layer.describe() << " n=" << params.n << " l_pt=" << params.l_pt() << " [" << to_string(geo.layout)
          << "] trace mult/rot " << pa_trace.he_mult << "/" << pa_trace.he_rotate << ", table " << table.he_mult
          << "/" << table.he_rotate << ", zero-shift diagonals skipped " << geo.unrotated_diagonals;
        if (!m || !r) {
            d << "  <- differs";
        }
        if (!exact) {
            d << "  <- trace/counters/model disagree";
        }
        if (!right) {
            d << "  <- wrong decryption";
        }
        detail(d.str());
    }
    const int n = static_cast<int>(cases.size());
    const bool pass = mult_ok == n && rot_ok == n && exact_ok == n && covered.size() == 7;
    std::cout << "criterion 2: " << (pass ? "PASS" : "FAIL") << "  closed-form table vs trace on " << n
              << " shapes (" << covered.size() << "/7 layout cases): HE_Mult equal on " << mult_ok
              << ", HE_Rotate equal on " << rot_ok << " (" << rot_with_skips
              << " once skipped zero-shift rotations are added back); trace = counters = exact model on "
              << exact_ok << ", both schedules; " << correct << " decrypt correctly\n";
    return pass;
}

// ------------------------------------------------------------------ 3

bool noise_soundness()
{
    struct Subject {
        LayerSpec layer;
        Schedule schedule;
    };
    const std::vector<Subject> subjects = {
        {LayerSpec::cnn(8, 3, 4, 4), Schedule::pa},
        {LayerSpec::cnn(8, 3, 4, 4), Schedule::ia},
        {LayerSpec::fc(128, 128), Schedule::pa},
        {LayerSpec::fc(128, 128), Schedule::ia},
        {LayerSpec::cnn(16, 5, 1, 6), Schedule::pa},
        {LayerSpec::fc(256, 120), Schedule::pa},
    };
    constexpr int kTrials = 1000;
    const auto t0 = Clock::now();
    int failures = 0;
    int tight = 0;
    int tight_ok = 0;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const auto& [layer, s] = subjects[i];
        const Tuned tuned = tune_layer(layer, s);
        const LayerHarness h(layer, BfvContext::create(tuned.params), 40 + i);
        int bad = 0;
        double low = 1e300;
        double sum = 0;
        for (int k = 0; k < kTrials; ++k) {
            const TrialOutcome o = h.run(s, 100000 * (i + 1) + static_cast<std::uint64_t>(k));
            bad += o.correct ? 0 : 1;
            low = std::min(low, o.measured_budget);
            sum += o.measured_budget;
        }
        failures += bad;
        const double predicted = noise_model(layer, tuned.params, s).budget_bits;
        const bool is_tight = predicted < 5;
        const bool within = predicted <= low + 1;
        tight += is_tight ? 1 : 0;
        tight_ok += (is_tight && within) ? 1 : 0;
        std::ostringstream d;
        d << std::fixed << std::setprecision(2) << layer.describe() << " " << to_string(s) << " n=" << tuned.params.n
          << " t=" << int(tuned.point.t_bits) << "b q=" << int(tuned.point.q_bits) << "b: " << bad << "/" << kTrials
          << " failures, predicted " << predicted << " bits, measured min " << low << " mean " << sum / kTrials
          << (is_tight ? (within ? "" : "  <- prediction above measured + 1") : "  (slack >= 5, bound not checked)");
        detail(d.str());
    }
    const bool pass = failures == 0 && tight_ok == tight && tight > 0;
    std::cout << "criterion 3: " << (pass ? "PASS" : "FAIL") << "  " << failures << " decryption failures in "
              << subjects.size() * kTrials << " trials; predicted <= measured + 1 bit on " << tight_ok << "/" << tight
              << " tightly tuned layers, " << std::fixed << std::setprecision(1) << seconds_since(t0) << " s\n";
    return pass;
}

// ------------------------------------------------------------------ 4

bool pa_advantage()
{
    // paired runs: same data, keys and encryption randomness at IA-tuned parameters
    const std::vector<LayerSpec> layers = random_layers(404, 50, 50);
    int paired_ok = 0;
    int strictly = 0;
    int gap_ok = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Tuned ia = tune_layer(layers[i], Schedule::ia);
        const LayerHarness h(layers[i], BfvContext::create(ia.params), 800 + i);
        Rng rng(900 + i);
        const u64 t = ia.params.t.value();
        const auto x = random_plain(input_size(layers[i]), t, rng);
        const auto w = random_plain(weight_size(layers[i]), t, rng);
        const TrialOutcome pa = h.run(Schedule::pa, x, w, 1000 + i);
        const TrialOutcome ib = h.run(Schedule::ia, x, w, 1000 + i);
        const bool ok = pa.correct && ib.correct && pa.measured_budget >= ib.measured_budget;
        paired_ok += ok ? 1 : 0;
        strictly += pa.measured_budget > ib.measured_budget ? 1 : 0;
        if (!ok) {
            detail("paired trial failed: " + layers[i].describe());
        }

        const double em = eta_mult(ia.params);
        const double ea = eta_rotate(ia.params);
        const double v0 = fresh_noise_bound(ia.params);
        const double gap = partial_noise(Schedule::ia, em, ea, v0) - partial_noise(Schedule::pa, em, ea, v0);
        gap_ok += std::abs(gap - (em - 1) * ea) <= 1e-9 * std::max(1.0, (em - 1) * ea) ? 1 : 0;
    }

    // tuner cost on every builtin layer plus the random ones
    int forced = 0;
    int forced_cheaper = 0;
    int never_worse = 0;
    int cost_layers = 0;
    std::vector<std::pair<LayerSpec, int>> cost_set;
    for (const auto& name : builtin_names()) {
        for (const auto& l : builtin(name).layers) {
            cost_set.emplace_back(l.spec, l.plain_bits);
        }
    }
    for (const auto& l : layers) {
        cost_set.emplace_back(l, 0);
    }
    for (const auto& [layer, bits] : cost_set) {
        const Tuned pa = tune_layer(layer, Schedule::pa, bits);
        const Tuned ia = tune_layer(layer, Schedule::ia, bits);
        ++cost_layers;
        never_worse += pa.int_mults <= ia.int_mults ? 1 : 0;
        const bool is_forced = ia.params.l_pt() > 1 || ia.params.a_dcmp < pa.params.a_dcmp;
        if (is_forced) {
            ++forced;
            forced_cheaper += pa.int_mults < ia.int_mults ? 1 : 0;
            if (pa.int_mults >= ia.int_mults) {
                detail("PA not cheaper where IA is forced: " + layer.describe());
            }
        }
    }
    const int n = static_cast<int>(layers.size());
    const bool pass = paired_ok == n && gap_ok == n && forced_cheaper == forced && never_worse == cost_layers;
    std::cout << "criterion 4: " << (pass ? "PASS" : "FAIL") << "  PA budget >= IA in " << paired_ok << "/" << n
              << " paired trials (" << strictly << " strictly); predicted gap = (eta_M-1) eta_A on " << gap_ok << "/"
              << n << "; PA cheaper on " << forced_cheaper << "/" << forced
              << " layers where IA needs l_pt > 1 or a smaller A, never costlier on " << never_worse << "/"
              << cost_layers << "\n";
    return pass;
}

// ------------------------------------------------------------------ 5

bool infeasibility_ratio()
{
    const NetworkSpec net = builtin("alexnet");
    bool pass = true;
    std::ostringstream sum;
    for (const auto& l : net.layers) {
        if (l.spec.kind != LayerKind::fc) {
            continue;
        }
        TuneOptions opt;
        opt.min_t_bits = l.plain_bits;
        const Exploration ex = explore(l.spec, ParamGrid{}, opt);
        std::size_t negative = 0;
        for (const auto& c : ex.candidates) {
            negative += c.budget_bits < 0 ? 1 : 0;
        }
        const double ratio = static_cast<double>(negative) / static_cast<double>(ex.candidates.size());
        pass = pass && ratio >= 0.95;
        std::ostringstream d;
        d << std::fixed << std::setprecision(1) << l.name << " " << l.spec.describe() << ": " << negative << "/"
          << ex.candidates.size() << " explored points negative (" << 100 * ratio << "%), " << ex.skipped
          << " grid points without primes skipped";
        detail(d.str());
        sum << (sum.tellp() > 0 ? ", " : "") << std::fixed << std::setprecision(1) << 100 * ratio << "%";
    }
    std::cout << "criterion 5: " << (pass ? "PASS" : "FAIL") << "  negative-budget share on AlexNet FC layers "
              << sum.str() << " (need >= 95%)\n";
    return pass;
}

// ------------------------------------------------------------------ 6

bool tuned_dominance()
{
    bool pass = true;
    std::ostringstream sum;
    for (const auto& name : builtin_names()) {
        const TuningResult r = tune_network(builtin(name), ParamGrid{});
        if (!r.baseline) {
            detail(name + ": no single parameter set fits every layer");
            pass = false;
            continue;
        }
        int dominated = 0;
        int strict = 0;
        for (std::size_t i = 0; i < r.layers.size(); ++i) {
            const u64 tuned = r.layers[i].counts.int_mults;
            const u64 fixed = r.baseline->layer_int_mults[i];
            dominated += tuned <= fixed ? 1 : 0;
            strict += tuned < fixed ? 1 : 0;
        }
        const bool imagenet = name == "alexnet" || name == "vgg16" || name == "resnet50";
        const bool ok = dominated == static_cast<int>(r.layers.size()) && (!imagenet || strict > 0);
        pass = pass && ok;
        std::ostringstream d;
        d << std::fixed << std::setprecision(2) << name << ": tuned <= fixed on " << dominated << "/"
          << r.layers.size() << ", strictly better on " << strict << ", network cost ratio "
          << static_cast<double>(r.baseline->total_int_mults) / static_cast<double>(r.total_int_mults)
          << "x (fixed n=" << r.baseline->point.n << " q=" << int(r.baseline->point.q_bits) << "b)";
        detail(d.str());
    }
    std::cout << "criterion 6: " << (pass ? "PASS" : "FAIL")
              << "  per-layer tuned cost never exceeds the best network-wide parameter set; strict gain on each "
                 "ImageNet model\n";
    return pass;
}

// ------------------------------------------------------------------ 7

std::vector<LayerWork> network_work(const std::string& name)
{
    const TuningResult tuned = tune_network(builtin(name), ParamGrid{});
    std::vector<LayerWork> work;
    for (const auto& l : tuned.layers) {
        LayerWork w = layer_work(l.spec, l.params);
        w.name = l.name;
        work.push_back(std::move(w));
    }
    return work;
}

bool dominates(const SimResult& a, const SimResult& b)
{
    return a.power_w <= b.power_w && a.latency_ms <= b.latency_ms &&
           (a.power_w < b.power_w || a.latency_ms < b.latency_ms);
}

bool simulator_shape()
{
    const SweepRange pes{2, 1024};
    const SweepRange lanes{4, 8192};
    AcceleratorConfig base;
    base.technology = technology_factor(40, 5);
    const CostTable costs = CostTable::defaults();

    std::map<std::string, std::vector<LayerWork>> work;
    for (const auto& name : builtin_names()) {
        work[name] = network_work(name);
    }

    // (a) frontier has no dominated point and dominates everything it dropped
    bool a_ok = true;
    std::map<std::string, std::vector<SimResult>> fronts;
    for (const auto& [name, w] : work) {
        fronts[name] = dse(w, pes, lanes, costs, base);
        const auto& f = fronts[name];
        for (const auto& x : f) {
            for (const auto& y : f) {
                a_ok = a_ok && !dominates(y, x);
            }
        }
        for (int p : pes.values()) {
            for (int l : lanes.values()) {
                AcceleratorConfig c = base;
                c.num_pes = p;
                c.lanes_per_pe = l;
                const SimResult r = simulate(w, c, costs);
                const bool kept = std::any_of(f.begin(), f.end(), [&](const SimResult& s) {
                    return s.config.num_pes == p && s.config.lanes_per_pe == l;
                });
                const bool covered = std::any_of(f.begin(), f.end(), [&](const SimResult& s) {
                    return dominates(s, r) || (s.power_w == r.power_w && s.latency_ms == r.latency_ms);
                });
                a_ok = a_ok && (kept || covered);
            }
        }
        detail(name + ": " + std::to_string(f.size()) + " frontier points");
    }
    std::cout << "criterion 7a: " << (a_ok ? "PASS" : "FAIL")
              << "  every frontier is dominance-free and covers all swept configurations\n";

    // (b) NTT and HE_Rotate lead the per-kernel time breakdown
    bool b_ok = true;
    for (const auto& [name, w] : work) {
        AcceleratorConfig c;
        const SimResult r = simulate(w, c, costs);
        const double mult = r.kernel_ms[static_cast<std::size_t>(Kernel::he_mult)];
        const double add = r.kernel_ms[static_cast<std::size_t>(Kernel::he_add)];
        const bool ok = std::min(r.ntt_ms(), r.rotate_ms()) > std::max(mult, add);
        b_ok = b_ok && ok;
        std::ostringstream d;
        d << std::fixed << std::setprecision(3) << name << " at 8x512: NTT " << r.ntt_ms() << " ms, HE_Rotate "
          << r.rotate_ms() << " ms, HE_Mult " << mult << " ms, HE_Add " << add << " ms";
        detail(d.str());
    }
    std::cout << "criterion 7b: " << (b_ok ? "PASS" : "FAIL")
              << "  NTT and HE_Rotate are the two largest time consumers for every builtin model\n";

    // (c) networks run on the ResNet50-optimized design
    const AcceleratorConfig host = select_design(fronts["resnet50"]).config;
    const CrossRun vgg = cross_model_run(work["vgg16"], host, costs, pes, lanes);
    const CrossRun alex = cross_model_run(work["alexnet"], host, costs, pes, lanes);
    const bool c_ok = vgg.increase > alex.increase && alex.increase > 0;
    for (const auto* run : {&vgg, &alex}) {
        std::ostringstream d;
        d << std::fixed << std::setprecision(3) << (run == &vgg ? "vgg16" : "alexnet") << ": " << run->result.latency_ms
          << " ms at " << run->result.power_w << " W; own frontier reference " << run->reference.config.num_pes << "x"
          << run->reference.config.lanes_per_pe << " " << run->reference.latency_ms << " ms at "
          << run->reference.power_w << " W";
        detail(d.str());
    }
    std::ostringstream cs;
    cs << std::fixed << std::setprecision(3) << "on the ResNet50 design " << host.num_pes << "x" << host.lanes_per_pe
       << ": increase vgg16 " << vgg.increase << ", alexnet " << alex.increase << " (need vgg16 > alexnet > 0)";
    std::cout << "criterion 7c: " << (c_ok ? "PASS" : "FAIL") << "  " << cs.str() << "\n";

    // calibrated stretch check at 5nm
    AcceleratorConfig r50 = base;
    const SimResult at8 = simulate(work["resnet50"], r50, costs);
    const bool lat_ok = std::abs(at8.latency_ms - 100) <= 25;
    const auto& f = fronts["resnet50"];
    const auto near = std::find_if(f.begin(), f.end(), [](const SimResult& s) {
        return std::abs(s.power_w - 30) <= 7.5 && std::abs(s.area_mm2 - 545) <= 136.25;
    });
    const bool stretch = lat_ok && near != f.end();
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << "ResNet50 8x512 at 5nm: " << at8.latency_ms << " ms, "
       << at8.power_w << " W, " << at8.area_mm2 << " mm2 (target 100 ms +-25%); frontier point near 30 W / 545 mm2: "
       << (near != f.end() ? "found" : "none");
    std::cout << "criterion 7 calibrated: " << (stretch ? "PASS" : "FAIL") << "  " << ss.str() << "\n";
    if (near == f.end()) {
        const auto closest = std::min_element(f.begin(), f.end(), [](const SimResult& x, const SimResult& y) {
            auto dist = [](const SimResult& s) {
                return std::hypot((s.power_w - 30) / 30, (s.area_mm2 - 545) / 545);
            };
            return dist(x) < dist(y);
        });
        std::ostringstream d;
        d << std::fixed << std::setprecision(1) << "closest frontier point " << closest->config.num_pes << "x"
          << closest->config.lanes_per_pe << ": " << closest->power_w << " W, " << closest->area_mm2 << " mm2, "
          << closest->latency_ms << " ms";
        detail(d.str());
    }
    // the stretch check is reported, not gated
    return a_ok && b_ok && c_ok;
}

// ------------------------------------------------------------------ 8

std::vector<u64> schoolbook_negacyclic(const std::vector<u64>& a, const std::vector<u64>& b, const Modulus& m)
{
    const std::size_t n = a.size();
    std::vector<u64> c(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const u64 prod = mod_mul(a[i], b[j], m);
            const std::size_t k = i + j;
            if (k < n) {
                c[k] = mod_add(c[k], prod, m);
            } else {
                c[k - n] = mod_sub(c[k - n], prod, m);
            }
        }
    }
    return c;
}

bool ntt_oracle()
{
    constexpr int kTrials = 100;
    int ok = 0;
    int total = 0;
    Rng rng(8);
    for (std::size_t n : {16u, 64u, 256u}) {
        for (int bits : {20, 60}) {
            const Modulus m = generate_ntt_prime(bits, n);
            const NttTables tables(n, m);
            std::uniform_int_distribution<u64> dist(0, m.value() - 1);
            for (int k = 0; k < kTrials; ++k) {
                std::vector<u64> a(n);
                std::vector<u64> b(n);
                for (std::size_t i = 0; i < n; ++i) {
                    a[i] = dist(rng);
                    b[i] = dist(rng);
                }
                std::vector<u64> fa = ntt_forward(a, tables);
                const std::vector<u64> fb = ntt_forward(b, tables);
                for (std::size_t i = 0; i < n; ++i) {
                    fa[i] = mod_mul(fa[i], fb[i], m);
                }
                ok += ntt_inverse(fa, tables) == schoolbook_negacyclic(a, b, m) ? 1 : 0;
                ++total;
            }
        }
    }
    const bool pass = ok == total;
    std::cout << "criterion 8: " << (pass ? "PASS" : "FAIL") << "  NTT product equals schoolbook negacyclic product in "
              << ok << "/" << total << " trials (n = 16, 64, 256; 20- and 60-bit primes)\n";
    return pass;
}

} // namespace

int main(int argc, char** argv)
{
    const std::map<int, std::function<bool()>> criteria = {
        {1, homomorphic_correctness}, {2, count_fidelity}, {3, noise_soundness},  {4, pa_advantage},
        {5, infeasibility_ratio},     {6, tuned_dominance}, {7, simulator_shape}, {8, ntt_oracle},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (!criteria.contains(k)) {
            std::cerr << "unknown criterion " << argv[i] << "\n";
            return 2;
        }
        selected.push_back(k);
    }
    if (selected.empty()) {
        for (const auto& [k, f] : criteria) {
            selected.push_back(k);
        }
    }
    int failed = 0;
    for (int k : selected) {
        try {
            failed += criteria.at(k)() ? 0 : 1;
        } catch (const std::exception& e) {
            std::cout << "criterion " << k << ": FAIL  threw " << e.what() << "\n";
            ++failed;
        }
        std::cout.flush();
    }
    return failed == 0 ? 0 : 1;
}
