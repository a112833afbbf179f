#include "cheetah/accelsim.hpp"
#include "cheetah/harness.hpp"
#include "cheetah/netdesc.hpp"
#include "cheetah/tuner.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cheetah;

namespace {

NetworkSpec resolve(const py::object& model)
{
    if (py::isinstance<py::str>(model)) {
        const auto name = model.cast<std::string>();
        if (name.ends_with(".json")) {
            return load_network(name);
        }
        return builtin(name);
    }
    NetworkSpec net;
    net.name = "custom";
    std::size_t i = 0;
    for (const auto& item : model) {
        NetLayer l;
        l.name = "layer" + std::to_string(i++);
        l.spec = item.cast<LayerSpec>();
        net.layers.push_back(l);
    }
    net.validate();
    return net;
}

ParamGrid grid_from(const std::optional<std::vector<std::size_t>>& n, const std::optional<std::pair<int, int>>& t_bits,
                    const std::optional<std::pair<int, int>>& q_bits, bool enforce_security)
{
    ParamGrid g;
    if (n) {
        g.n_choices = *n;
    }
    if (t_bits) {
        g.t_bits = {t_bits->first, t_bits->second};
    }
    if (q_bits) {
        g.q_bits = {q_bits->first, q_bits->second};
    }
    g.enforce_security = enforce_security;
    g.validate();
    return g;
}

std::vector<LayerWork> network_work(const NetworkSpec& net, const ParamGrid& grid)
{
    const TuningResult tuned = tune_network(net, grid);
    std::vector<LayerWork> work;
    for (const auto& l : tuned.layers) {
        LayerWork w = layer_work(l.spec, l.params);
        w.name = l.name;
        work.push_back(std::move(w));
    }
    return work;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "BFV layer evaluation, parameter tuning and accelerator simulation";

    py::register_exception<NoFeasibleParams>(m, "NoFeasibleParams");
    py::register_exception<InvalidGrid>(m, "InvalidGrid", PyExc_ValueError);
    py::register_exception<UnknownModel>(m, "UnknownModel", PyExc_ValueError);
    py::register_exception<ConfigOutOfBounds>(m, "ConfigOutOfBounds", PyExc_ValueError);

    py::enum_<Schedule>(m, "Schedule").value("pa", Schedule::pa).value("ia", Schedule::ia);

    py::class_<HeParams>(m, "HeParams")
        .def_static("from_bits", &HeParams::from_bits, py::arg("n"), py::arg("t_bits"), py::arg("q_bits"),
                    py::arg("w_bits"), py::arg("a_bits"), py::arg("sigma") = kDefaultSigma)
        .def_readonly("n", &HeParams::n)
        .def_property_readonly("t", [](const HeParams& p) { return p.t.value(); })
        .def_property_readonly("q", [](const HeParams& p) { return p.q.value(); })
        .def_readonly("w_dcmp", &HeParams::w_dcmp)
        .def_readonly("a_dcmp", &HeParams::a_dcmp)
        .def_property_readonly("l_pt", &HeParams::l_pt)
        .def_property_readonly("l_ct", &HeParams::l_ct)
        .def("__repr__", [](const HeParams& p) {
            return "HeParams(n=" + std::to_string(p.n) + ", t=" + std::to_string(p.t.value()) +
                   ", q=" + std::to_string(p.q.value()) + ", l_pt=" + std::to_string(p.l_pt()) +
                   ", l_ct=" + std::to_string(p.l_ct()) + ")";
        });

    py::class_<LayerSpec>(m, "LayerSpec")
        .def_static("cnn", &LayerSpec::cnn, py::arg("w"), py::arg("f_w"), py::arg("c_i"), py::arg("c_o"))
        .def_static("fc", &LayerSpec::fc, py::arg("n_i"), py::arg("n_o"))
        .def_property_readonly("is_cnn", [](const LayerSpec& l) { return l.kind == LayerKind::cnn; })
        .def_readonly("w", &LayerSpec::w)
        .def_readonly("f_w", &LayerSpec::f_w)
        .def_readonly("c_i", &LayerSpec::c_i)
        .def_readonly("c_o", &LayerSpec::c_o)
        .def_readonly("n_i", &LayerSpec::n_i)
        .def_readonly("n_o", &LayerSpec::n_o)
        .def(py::self == py::self)
        .def("__repr__", &LayerSpec::describe);

    py::class_<OpCounts>(m, "OpCounts")
        .def_readonly("he_mult", &OpCounts::he_mult)
        .def_readonly("he_rotate", &OpCounts::he_rotate)
        .def_readonly("he_add", &OpCounts::he_add)
        .def_readonly("ntt", &OpCounts::ntt)
        .def_readonly("int_mults", &OpCounts::int_mults)
        .def(py::self == py::self);

    py::class_<NoiseEstimate>(m, "NoiseEstimate")
        .def_readonly("worst_case", &NoiseEstimate::worst_case)
        .def_readonly("output_noise", &NoiseEstimate::output_noise)
        .def_readonly("budget_bits", &NoiseEstimate::budget_bits)
        .def_readonly("feasible", &NoiseEstimate::feasible);

    m.def("perf_model", py::overload_cast<const LayerSpec&, const HeParams&, Schedule>(&perf_model), py::arg("layer"),
          py::arg("params"), py::arg("schedule") = Schedule::pa);
    m.def("table_counts", &closed_form_counts, py::arg("layer"), py::arg("params"));
    m.def(
        "noise_model",
        [](const LayerSpec& l, const HeParams& p, Schedule s) { return noise_model(l, p, s); }, py::arg("layer"),
        py::arg("params"), py::arg("schedule") = Schedule::pa);

    m.def("builtin_names", &builtin_names);
    m.def("network_layers", [](const py::object& model) {
        py::list out;
        for (const auto& l : resolve(model).layers) {
            out.append(py::dict(py::arg("name") = l.name, py::arg("spec") = l.spec,
                                py::arg("plain_bits") = l.plain_bits));
        }
        return out;
    });

    m.def(
        "tune_json",
        [](const py::object& model, Schedule s, std::optional<std::vector<std::size_t>> n,
           std::optional<std::pair<int, int>> t_bits, std::optional<std::pair<int, int>> q_bits,
           bool enforce_security) {
            const NetworkSpec net = resolve(model);
            const ParamGrid grid = grid_from(n, t_bits, q_bits, enforce_security);
            py::gil_scoped_release release;
            TuneOptions opt;
            opt.schedule = s;
            return to_json(tune_network(net, grid, opt));
        },
        py::arg("model"), py::arg("schedule") = Schedule::pa, py::arg("n") = py::none(),
        py::arg("t_bits") = py::none(), py::arg("q_bits") = py::none(), py::arg("enforce_security") = true);

    m.def(
        "dse_json",
        [](const py::object& model, std::pair<int, int> pes, std::pair<int, int> lanes, int node_nm) {
            const NetworkSpec net = resolve(model);
            py::gil_scoped_release release;
            AcceleratorConfig base;
            base.technology = technology_factor(40, node_nm);
            const auto work = network_work(net, ParamGrid{});
            return to_json(dse(work, {pes.first, pes.second}, {lanes.first, lanes.second}, CostTable::defaults(), base));
        },
        py::arg("model"), py::arg("pes") = std::pair{2, 1024}, py::arg("lanes") = std::pair{4, 8192},
        py::arg("node_nm") = 5);

    m.def(
        "run_trial",
        [](const LayerSpec& layer, const HeParams& params, Schedule s, std::uint64_t seed) {
            TrialOutcome o;
            {
                py::gil_scoped_release release;
                const LayerHarness h(layer, BfvContext::create(params), seed);
                o = h.run(s, seed + 1);
            }
            return py::dict(py::arg("correct") = o.correct, py::arg("budget_bits") = o.measured_budget,
                            py::arg("counts") = o.traced, py::arg("counts_match") = o.counts_match(),
                            py::arg("decoded") = o.decoded, py::arg("expected") = o.expected);
        },
        py::arg("layer"), py::arg("params"), py::arg("schedule") = Schedule::pa, py::arg("seed") = 1);
}
