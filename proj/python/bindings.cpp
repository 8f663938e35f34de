#include "wdma/diagnostics.hpp"
#include "wdma/errors.hpp"
#include "wdma/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wdma;

namespace {

Deployment deployment_from(const SystemConfig& config, const std::vector<std::array<double, 2>>& users) {
    std::vector<Point3> pts;
    for (const auto& u : users) pts.push_back({u[0], u[1], 0.0});
    return make_deployment(config, std::move(pts));
}

py::dict result_dict(const AoResult& r) {
    py::dict d;
    d["positions"] = r.layout.positions;
    d["powers"] = r.powers;
    d["rates"] = r.rates;
    d["sum_rate"] = r.rates.sum();
    d["trace"] = r.trace;
    d["rounds"] = r.rounds;
    d["feasible"] = r.feasible;
    d["zf_fallback"] = r.zf_fallback;
    if (r.matching) d["slots"] = r.matching->slots;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sum-rate optimisation for waveguide-division pinching-antenna systems";

    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init([](int num_users, int pas_per_waveguide, int num_slots) {
                 return SystemConfig::table_defaults(num_users, pas_per_waveguide, num_slots);
             }),
             py::arg("num_users") = 2, py::arg("pas_per_waveguide") = 4, py::arg("num_slots") = 20)
        .def_readwrite("num_users", &SystemConfig::num_users)
        .def_readwrite("pas_per_waveguide", &SystemConfig::pas_per_waveguide)
        .def_readwrite("num_slots", &SystemConfig::num_slots)
        .def_readwrite("carrier_freq", &SystemConfig::carrier_freq)
        .def_readwrite("refractive_index", &SystemConfig::refractive_index)
        .def_readwrite("height", &SystemConfig::height)
        .def_readwrite("strip_width", &SystemConfig::strip_width)
        .def_readwrite("strip_length", &SystemConfig::strip_length)
        .def_readwrite("min_spacing", &SystemConfig::min_spacing)
        .def_readwrite("max_power", &SystemConfig::max_power)
        .def_readwrite("noise_power", &SystemConfig::noise_power)
        .def_readwrite("min_rate", &SystemConfig::min_rate)
        .def("broadcast_per_user", &SystemConfig::broadcast_per_user)
        .def("validate", &SystemConfig::validate);

    m.def("dbm_to_watts", &dbm_to_watts);
    m.def("watts_to_dbm", &watts_to_dbm);

    m.def(
        "drop_users",
        [](const SystemConfig& c, std::uint64_t seed) {
            std::vector<std::array<double, 2>> out;
            for (const Point3& u : drop_users(c, seed).users) out.push_back({u.x, u.y});
            return out;
        },
        py::arg("config"), py::arg("seed"), "Random user positions [(x, y), ...], one per strip.");

    m.def(
        "solve",
        [](const std::string& scheme, const SystemConfig& c, const std::vector<std::array<double, 2>>& users,
           std::uint64_t seed, int max_rounds) {
            AoParams ap;
            ap.matching_seed = seed;
            ap.max_rounds = max_rounds;
            const Deployment dep = deployment_from(c, users);
            const Scheme s = parse_scheme(scheme);
            AoResult r;
            {
                py::gil_scoped_release release;
                r = ao_optimize(s, dep, c, ap);
            }
            return result_dict(r);
        },
        py::arg("scheme"), py::arg("config"), py::arg("users"), py::arg("seed") = 0, py::arg("max_rounds") = 30);

    m.def(
        "user_rates",
        [](const SystemConfig& c, const std::vector<std::array<double, 2>>& users, const Matrix& positions,
           const Vector& powers) {
            PinchingLayout layout;
            layout.positions = positions;
            return user_rates(layout, powers, deployment_from(c, users), c);
        },
        py::arg("config"), py::arg("users"), py::arg("positions"), py::arg("powers"));

    m.def(
        "channel_gain_map",
        [](const SystemConfig& c, const std::vector<std::array<double, 2>>& users, const Matrix& positions,
           int waveguide, int nx, int ny) {
            PinchingLayout layout;
            layout.positions = positions;
            return channel_gain_map(waveguide, layout, GridSpec::service_area(c, nx, ny), deployment_from(c, users),
                                    c);
        },
        py::arg("config"), py::arg("users"), py::arg("positions"), py::arg("waveguide"), py::arg("nx") = 101,
        py::arg("ny") = 61, "ny x nx gains in dB relative to the grid maximum.");

    m.def(
        "sweep",
        [](const std::vector<std::string>& schemes, const SystemConfig& c, const std::string& sweep_var,
           const std::vector<double>& values, int drops, std::uint64_t seed, int workers) {
            ExperimentSpec spec;
            spec.schemes.clear();
            for (const auto& s : schemes) spec.schemes.push_back(parse_scheme(s));
            spec.sweep_var = parse_sweep_var(sweep_var);
            spec.values = values;
            spec.drops = drops;
            spec.seed = seed;
            spec.workers = workers;
            ResultTable t;
            {
                py::gil_scoped_release release;
                t = run_experiment(spec, c);
            }
            py::list rows;
            for (const ResultRow& r : t.rows) {
                py::dict d;
                d["sweep_var"] = r.sweep_var;
                d["sweep_value"] = r.sweep_value;
                d["drop"] = r.drop;
                d["scheme"] = r.scheme;
                d["sum_rate"] = r.sum_rate;
                d["rates"] = r.rates;
                d["feasible"] = r.feasible;
                d["ao_rounds"] = r.ao_rounds;
                rows.append(d);
            }
            return rows;
        },
        py::arg("schemes"), py::arg("config"), py::arg("sweep_var") = "P_max",
        py::arg("values") = std::vector<double>{20.0}, py::arg("drops") = 10, py::arg("seed") = 1,
        py::arg("workers") = 1);

    m.def(
        "grad_check",
        [](int configurations, std::uint64_t seed) {
            const GradCheckReport r = gradient_check(configurations, seed);
            return py::make_tuple(r.configurations, r.max_relative_error);
        },
        py::arg("configurations") = 100, py::arg("seed") = 1, "(configurations, max relative error)");

    m.def(
        "oracle_check",
        [](const SystemConfig& c, int drops, std::uint64_t seed) {
            const OracleReport r = oracle_check(c, drops, seed);
            return py::make_tuple(r.mean_ratio, r.worst_ratio, r.unstable);
        },
        py::arg("config"), py::arg("drops") = 100, py::arg("seed") = 1, "(mean ratio, worst ratio, unstable count)");
}
