#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

using namespace cheetah;
using namespace cheetah::cli;

namespace {

void add_common(CLI::App* sub, Common& c)
{
    auto* model = sub->add_option("--model,-m", c.model, "builtin network (lenet300, lenet5, alexnet, vgg16, resnet50)");
    auto* file = sub->add_option("--network", c.network_file, "network description file (JSON)");
    model->excludes(file);
    file->excludes(model);
    sub->add_option("--seed", c.seed, "seed for every random draw")->default_val(1);
    sub->add_option("--out,-o", c.out, "output path");
    sub->add_option("--n", c.n_list, "ring degrees, comma separated");
    sub->add_option("--t-bits", c.t_bits, "plaintext modulus bits, N or LO..HI");
    sub->add_option("--q-bits", c.q_bits, "ciphertext modulus bits, N or LO..HI");
    sub->add_option("--w-bits", c.w_bits, "plaintext decomposition base bits");
    sub->add_option("--a-bits", c.a_bits, "ciphertext decomposition base bits");
    sub->add_flag("--no-security", c.no_security, "ignore the q-vs-n security table");
    sub->add_option("--threads", c.threads, "worker threads, 0 for all cores");
}

void require_model(const Common& c)
{
    if (c.model.empty() && c.network_file.empty()) {
        throw CLI::RequiredError("--model or --network");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Homomorphic inference parameter tuner, layer runner and accelerator simulator"};
    app.require_subcommand(1);

    TuneArgs tune;
    auto* t = app.add_subcommand("tune", "pick per-layer HE parameters");
    add_common(t, tune.common);
    t->add_option("--schedule", tune.schedule, "pa or ia")->default_val("pa");

    RunArgs run;
    auto* r = app.add_subcommand("run", "execute layers under encryption and compare with the models");
    add_common(r, run.common);
    r->add_option("--layer", run.layers, "layer index, repeatable; default all");
    r->add_option("--schedule", run.schedule, "pa, ia or both")->default_val("both");
    r->add_option("--trials", run.trials, "trials per layer; 0 validates without executing")->default_val(5);
    r->add_flag("--full", run.full, "run real layer sizes instead of desk-scale shapes");
    r->add_option("--max-w", run.max_w, "desk-scale image width cap")->default_val(16);
    r->add_option("--max-c", run.max_c, "desk-scale channel cap")->default_val(8);
    r->add_option("--max-fc", run.max_fc, "desk-scale FC side cap")->default_val(256);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "tune, map onto the accelerator and sweep PEs x lanes");
    add_common(s, sim.common);
    s->add_option("--node", sim.node, "technology node: 40nm, 16nm or 5nm")->default_val("5nm");
    s->add_option("--pes", sim.pes, "PE sweep, powers of two in LO..HI")->default_val("2..1024");
    s->add_option("--lanes", sim.lanes, "lane sweep, powers of two in LO..HI")->default_val("4..8192");
    s->add_option("--costs", sim.costs_file, "kernel cost table (JSON)");
    s->add_option("--ntt-parallel", sim.ntt_parallel, "NTT units per lane, 0 for one per digit")->default_val(0);
    s->add_flag("--io-bound", sim.io_bound, "cap throughput by interface bandwidth");
    s->add_option("--bandwidth", sim.bandwidth, "interface bandwidth in GB/s")->default_val(512);
    s->add_option("--cross", sim.cross, "also run on the design chosen for this other builtin model");

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "run the invariant battery on a model");
    add_common(v, val.common);
    v->add_option("--trials", val.trials, "noise-soundness trials per layer")->default_val(20);
    v->add_flag("--inject-fault", val.inject_fault, "drop q 10 bits below the tuned value");
    v->add_flag("--json", val.json, "machine-readable output");
    v->add_option("--max-w", val.max_w, "desk-scale image width cap")->default_val(16);
    v->add_option("--max-c", val.max_c, "desk-scale channel cap")->default_val(8);
    v->add_option("--max-fc", val.max_fc, "desk-scale FC side cap")->default_val(256);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return io_error;
    }

    try {
        if (t->parsed()) {
            require_model(tune.common);
            return cmd_tune(tune);
        }
        if (r->parsed()) {
            require_model(run.common);
            return cmd_run(run);
        }
        if (s->parsed()) {
            require_model(sim.common);
            return cmd_simulate(sim);
        }
        require_model(val.common);
        return cmd_validate(val);
    } catch (const NoFeasibleParams& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return infeasible;
    } catch (const ValidationFailure& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return validation_failed;
    } catch (const ParseError& e) {
        std::cerr << "parse error";
        if (e.line() > 0) {
            std::cerr << " at line " << e.line();
        }
        std::cerr << ": " << e.what() << "\n";
        return io_error;
    } catch (const CLI::Error& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return io_error;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return io_error;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return io_error;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return io_error;
    } catch (const std::invalid_argument& e) {
        // unknown model, bad grid, bad network composition, out-of-range config
        std::cerr << "error: " << e.what() << "\n";
        return io_error;
    } catch (const std::runtime_error& e) {
        // file open failures surface as runtime_error
        std::cerr << "error: " << e.what() << "\n";
        return io_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return internal_error;
    }
}
