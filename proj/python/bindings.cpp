#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "odmdcpd/cpd.hpp"
#include "odmdcpd/datagen.hpp"
#include "odmdcpd/evaluation.hpp"
#include "odmdcpd/hankel.hpp"
#include "odmdcpd/rank.hpp"

namespace py = pybind11;
using namespace odmdcpd;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Streaming change-point detection via truncated online DMD with control";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);

    py::class_<HankelConfig>(m, "HankelConfig")
        .def(py::init<>())
        .def(py::init([](int delays, int stride) {
                 HankelConfig c{delays, stride};
                 c.validate();
                 return c;
             }),
             py::arg("delays") = 0, py::arg("delay_stride") = 1)
        .def_readwrite("delays", &HankelConfig::delays)
        .def_readwrite("delay_stride", &HankelConfig::delay_stride)
        .def("rows_per_signal", &HankelConfig::rows_per_signal);

    py::class_<WindowLayout>(m, "WindowLayout")
        .def(py::init<>())
        .def(py::init([](int a, int b, int c, int d) {
                 WindowLayout l{a, b, c, d};
                 l.validate();
                 return l;
             }),
             py::arg("base"), py::arg("gap"), py::arg("test"), py::arg("learn"))
        .def_readwrite("base", &WindowLayout::base)
        .def_readwrite("gap", &WindowLayout::gap)
        .def_readwrite("test", &WindowLayout::test)
        .def_readwrite("learn", &WindowLayout::learn);

    py::enum_<ScoreBasis>(m, "ScoreBasis")
        .value("POD_SUBSPACE", ScoreBasis::PodSubspace)
        .value("DMD_MODES", ScoreBasis::DmdModes);

    py::class_<CpdConfig>(m, "CpdConfig")
        .def(py::init<>())
        .def_readwrite("layout", &CpdConfig::layout)
        .def_readwrite("hankel", &CpdConfig::hankel)
        .def_readwrite("rank_state", &CpdConfig::rank_state)
        .def_readwrite("rank_control", &CpdConfig::rank_control)
        .def_readwrite("threshold", &CpdConfig::threshold)
        .def_readwrite("score_basis", &CpdConfig::score_basis)
        .def_readwrite("rho", &CpdConfig::rho)
        .def_readwrite("svd_tol", &CpdConfig::svd_tol)
        .def_property(
            "control_matrix",
            [](const CpdConfig& c) -> py::object {
                if (!c.control_matrix) return py::none();
                return py::cast(*c.control_matrix);
            },
            [](CpdConfig& c, py::object value) {
                if (value.is_none())
                    c.control_matrix.reset();
                else
                    c.control_matrix = value.cast<Eigen::MatrixXd>();
            });

    py::class_<CpdScore>(m, "CpdScore")
        .def_readonly("step", &CpdScore::step)
        .def_readonly("timestamp", &CpdScore::timestamp)
        .def_readonly("base_error", &CpdScore::base_error)
        .def_readonly("test_error", &CpdScore::test_error)
        .def_readonly("ratio", &CpdScore::ratio)
        .def_readonly("difference", &CpdScore::difference)
        .def_readonly("alarm", &CpdScore::alarm)
        .def_readonly("degenerate_base", &CpdScore::degenerate_base)
        .def("__repr__", [](const CpdScore& s) {
            return "CpdScore(step=" + std::to_string(s.step) +
                   ", ratio=" + std::to_string(s.ratio) +
                   ", difference=" + std::to_string(s.difference) +
                   (s.alarm ? ", alarm=True)" : ")");
        });

    py::class_<OnlineSvd>(m, "OnlineSvd")
        .def_static("initialize", &OnlineSvd::initialize, py::arg("init_cols"), py::arg("rank"),
                    py::arg("tol") = -1.0)
        .def("update", &OnlineSvd::update, py::arg("cols"))
        .def("revert", &OnlineSvd::revert, py::arg("count"))
        .def("flush", &OnlineSvd::flush)
        .def_property_readonly("basis", &OnlineSvd::basis)
        .def_property_readonly("singular_values", &OnlineSvd::singular_values)
        .def_property_readonly("right_vectors", &OnlineSvd::right_vectors)
        .def_property_readonly("rank", &OnlineSvd::rank)
        .def_property_readonly("columns", &OnlineSvd::columns)
        .def_property_readonly("orthogonality_error", &OnlineSvd::orthogonality_error);

    py::class_<ModeSet>(m, "ModeSet")
        .def_readonly("eigenvalues", &ModeSet::eigenvalues)
        .def_readonly("eigenvectors", &ModeSet::eigenvectors)
        .def_readonly("modes", &ModeSet::modes)
        .def_readonly("defective", &ModeSet::defective);

    py::class_<OnlineDmd>(m, "OnlineDmd")
        .def(py::init<int, int, double>(), py::arg("rank_state"), py::arg("rank_control") = 0,
             py::arg("rho") = 1e4)
        .def("update", &OnlineDmd::update, py::arg("x"), py::arg("xp"),
             py::arg("weights") = Eigen::VectorXd())
        .def("revert", &OnlineDmd::revert, py::arg("x"), py::arg("xp"),
             py::arg("weights") = Eigen::VectorXd())
        .def("align", &OnlineDmd::align, py::arg("u_prev"), py::arg("u_new"))
        .def("modes", &OnlineDmd::modes, py::arg("u_state"))
        .def_property_readonly("op", &OnlineDmd::op)
        .def_property_readonly("state_op", &OnlineDmd::state_op)
        .def_property_readonly("control_op", &OnlineDmd::control_op)
        .def_property_readonly("precision", &OnlineDmd::precision)
        .def_property_readonly("rank_state", &OnlineDmd::rank_state)
        .def_property_readonly("rank_control", &OnlineDmd::rank_control);

    py::class_<CpdEngine>(m, "CpdEngine")
        .def(py::init<int, int, CpdConfig>(), py::arg("state_dim"), py::arg("control_dim"),
             py::arg("config"))
        .def(
            "step",
            [](CpdEngine& e, const Eigen::VectorXd& x, const Eigen::VectorXd& x_next,
               py::object control, double timestamp, double weight) -> py::object {
                Eigen::VectorXd u =
                    control.is_none() ? Eigen::VectorXd() : control.cast<Eigen::VectorXd>();
                auto s = e.step(x, x_next, u, timestamp, weight);
                if (!s) return py::none();
                return py::cast(*s);
            },
            py::arg("state"), py::arg("state_next"), py::arg("control") = py::none(),
            py::arg("timestamp") = 0.0, py::arg("weight") = 1.0)
        .def(
            "step_batch",
            [](CpdEngine& e, const Eigen::MatrixXd& states, const Eigen::MatrixXd& shifted,
               py::object controls, py::object timestamps) {
                RawBatch batch;
                batch.states = states;
                batch.shifted = shifted;
                batch.controls = controls.is_none() ? Eigen::MatrixXd(0, states.cols())
                                                    : controls.cast<Eigen::MatrixXd>();
                if (timestamps.is_none()) {
                    batch.timestamps.resize(states.cols());
                    for (Eigen::Index i = 0; i < states.cols(); ++i)
                        batch.timestamps[i] = static_cast<double>(i);
                } else {
                    batch.timestamps = timestamps.cast<std::vector<double>>();
                }
                return e.step_batch(batch);
            },
            py::arg("states"), py::arg("shifted"), py::arg("controls") = py::none(),
            py::arg("timestamps") = py::none())
        .def_property_readonly("warm", &CpdEngine::warm)
        .def_property_readonly("embedded_rows", &CpdEngine::embedded_rows)
        .def("score_basis_matrix", &CpdEngine::score_basis_matrix);

    m.def("hankelize", &hankelize, py::arg("data"), py::arg("config"));
    m.def("expand_control_matrix", &expand_control_matrix, py::arg("raw"), py::arg("config"));

    py::class_<StepsSpec>(m, "StepsSpec")
        .def(py::init<>())
        .def_readwrite("total", &StepsSpec::total)
        .def_readwrite("num_steps", &StepsSpec::num_steps)
        .def_readwrite("spacing", &StepsSpec::spacing)
        .def_readwrite("base_step", &StepsSpec::base_step)
        .def_readwrite("noise_std", &StepsSpec::noise_std)
        .def_readwrite("seed", &StepsSpec::seed);

    py::class_<TwoTankSpec>(m, "TwoTankSpec")
        .def(py::init<>())
        .def_readwrite("total", &TwoTankSpec::total)
        .def_readwrite("dt", &TwoTankSpec::dt)
        .def_readwrite("noise_var", &TwoTankSpec::noise_var)
        .def_readwrite("with_noise", &TwoTankSpec::with_noise)
        .def_readwrite("with_faults", &TwoTankSpec::with_faults)
        .def_readwrite("seed", &TwoTankSpec::seed);

    py::class_<GeneratedSeries>(m, "GeneratedSeries")
        .def_readonly("states", &GeneratedSeries::states)
        .def_readonly("controls", &GeneratedSeries::controls)
        .def_readonly("timestamps", &GeneratedSeries::timestamps)
        .def_readonly("labels", &GeneratedSeries::labels)
        .def_readonly("label_ends", &GeneratedSeries::label_ends);

    m.def("generate_steps", &generate_steps, py::arg("spec") = StepsSpec());
    m.def("simulate_two_tanks", &simulate_two_tanks, py::arg("spec") = TwoTankSpec());

    py::class_<NabProfile>(m, "NabProfile")
        .def(py::init<>())
        .def_static("standard", &NabProfile::standard)
        .def_static("low_fp", &NabProfile::low_fp)
        .def_static("low_fn", &NabProfile::low_fn)
        .def_static("by_name", &NabProfile::by_name)
        .def_readwrite("tp_weight", &NabProfile::tp_weight)
        .def_readwrite("fp_weight", &NabProfile::fp_weight)
        .def_readwrite("fn_weight", &NabProfile::fn_weight);

    m.def(
        "nab_score",
        [](const std::vector<long long>& alarms, const std::vector<long long>& labels,
           long long window_length, const NabProfile& profile) {
            return nab_score(ScoringRun{alarms, labels, window_length}, profile);
        },
        py::arg("alarms"), py::arg("labels"), py::arg("window_length"),
        py::arg("profile") = NabProfile::standard());
    m.def("default_window_length", &default_window_length, py::arg("span"), py::arg("num_labels"));

    py::class_<RankSuggestion>(m, "RankSuggestion")
        .def_readonly("rank", &RankSuggestion::rank)
        .def_readonly("threshold", &RankSuggestion::threshold)
        .def_readonly("kept_energy", &RankSuggestion::kept_energy)
        .def_readonly("ratio_inverted", &RankSuggestion::ratio_inverted)
        .def_readonly("singular_values", &RankSuggestion::singular_values);
    m.def("suggest_rank", &suggest_rank, py::arg("window"));
}
