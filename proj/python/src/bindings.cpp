#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <tuple>

#include "fermigas/cli.hpp"
#include "fermigas/errors.hpp"
#include "fermigas/fock_oracle.hpp"
#include "fermigas/observables.hpp"

namespace py = pybind11;
using namespace fermigas;

namespace {

using Triple = std::tuple<int, int, int>;

Momentum to_momentum(const Triple& t) { return {std::get<0>(t), std::get<1>(t), std::get<2>(t)}; }
Triple to_triple(const Momentum& p) { return {p.x, p.y, p.z}; }

RpaRoute parse_route(const std::string& route) {
    if (route == "matrix") return RpaRoute::matrix;
    if (route == "integral") return RpaRoute::integral;
    if (route == "series") return RpaRoute::series;
    throw InvalidArgument("route must be matrix, integral or series, got " + route);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bosonized momentum distribution of a lattice Fermi gas";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<ResourceLimitError>(m, "ResourceLimitError", PyExc_RuntimeError);
    py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

    py::class_<FermiBall>(m, "FermiBall")
        .def(py::init<std::int64_t>(), py::arg("shell_cap"))
        .def_property_readonly("shell_cap", &FermiBall::shell_cap)
        .def_property_readonly("kf", &FermiBall::kf)
        .def_property_readonly("n_particles", &FermiBall::n_particles)
        .def_property_readonly("min_outside_norm2", &FermiBall::min_outside_norm2)
        .def("contains", [](const FermiBall& b, const Triple& q) { return b.contains(to_momentum(q)); })
        .def("points", [](const FermiBall& b) {
            std::vector<Triple> out;
            for (const auto& p : b.points()) out.push_back(to_triple(p));
            return out;
        });

    py::class_<PotentialSpec>(m, "Potential")
        .def_property_readonly("name", &PotentialSpec::name)
        .def("__call__", [](const PotentialSpec& s, const Triple& l) { return s(to_momentum(l)); });
    m.def("potential", &parse_potential, py::arg("descriptor"),
          "Parse a descriptor such as \"coulomb:g=1\" or \"yukawa:g=1,p=2\".");

    m.def(
        "n_rpa",
        [](std::int64_t shell_cap, const std::string& potential, const Triple& q, const std::string& route,
           int order) {
            const FermiBall ball(shell_cap);
            const auto spec = parse_potential(potential);
            switch (parse_route(route)) {
                case RpaRoute::integral:
                    return n_rpa_integral(ball, spec, to_momentum(q)).n_rpa;
                case RpaRoute::series:
                    return n_rpa_series(KernelFamily(ball, spec), to_momentum(q), order).n_rpa;
                default:
                    return n_rpa_matrix(KernelFamily(ball, spec), to_momentum(q)).n_rpa;
            }
        },
        py::arg("shell_cap"), py::arg("potential"), py::arg("q"), py::arg("route") = "matrix", py::arg("order") = 20);

    m.def(
        "n_exchange",
        [](std::int64_t shell_cap, const std::string& potential, const Triple& q) {
            const auto r = n_exchange(KernelFamily(FermiBall(shell_cap), parse_potential(potential)), to_momentum(q));
            return py::dict(py::arg("n_ex") = r.n_ex, py::arg("n_ex_m1") = r.n_ex_m1,
                            py::arg("difference") = r.difference);
        },
        py::arg("shell_cap"), py::arg("potential"), py::arg("q"));

    m.def(
        "oracle",
        [](std::int64_t shell_cap, const std::string& potential, std::int64_t cutoff, int cap) {
            const auto run =
                run_oracle(FermiBall(shell_cap), parse_potential(potential), cutoff, cap, 1e-14, {0.0, 1.0}, 1'000'000);
            py::list rows;
            for (const auto& r : run.rows)
                rows.append(py::dict(py::arg("q") = to_triple(r.q), py::arg("inside_ball") = r.inside_ball,
                                     py::arg("n_exact") = r.n_exact, py::arg("n_rpa") = r.n_rpa_trunc,
                                     py::arg("n_ex") = r.n_ex_trunc, py::arg("residual") = r.residual,
                                     py::arg("residual_minus") = r.residual_minus));
            return py::dict(py::arg("modes") = run.modes.size(), py::arg("dim") = run.dim, py::arg("rows") = rows);
        },
        py::arg("shell_cap") = 1, py::arg("potential") = "coulomb:g=1", py::arg("cutoff") = 1, py::arg("cap") = 4);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return std::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
