// Python bindings: thin wrappers around the command layer. Reports cross the
// boundary as canonical JSON text and are decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spraylab/errors.hpp"
#include "spraylab/report.hpp"

namespace py = pybind11;

namespace {

spraylab::RunConfig make_config(const std::string& spray, const std::optional<std::string>& file,
                                const std::vector<std::string>& sigmas, int points, std::uint64_t seed, int order,
                                const std::vector<std::string>& tol) {
    spraylab::RunConfig cfg;
    if (file) {
        cfg.file = *file;
        cfg.family = "custom";
    } else {
        spraylab::parse_spray_spec(spray, cfg);
    }
    cfg.sigmas = sigmas;
    cfg.points = points;
    cfg.seed = seed;
    cfg.order = order;
    for (const auto& t : tol) spraylab::parse_tolerance(t, cfg);
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_spraylab, m) {
    m.doc() = "spraylab native core";
    m.attr("__version__") = spraylab::kVersion;

    auto base = py::register_exception<spraylab::Error>(m, "Error", PyExc_RuntimeError);
    auto input = py::register_exception<spraylab::InputError>(m, "InputError", base.ptr());
    py::register_exception<spraylab::ParseError>(m, "ParseError", input.ptr());
    py::register_exception<spraylab::DomainError>(m, "DomainError", base.ptr());
    py::register_exception<spraylab::OrderError>(m, "OrderError", base.ptr());
    py::register_exception<spraylab::DegenerateMetric>(m, "DegenerateMetric", base.ptr());

    m.def("list_text", &spraylab::cmd_list);
    m.def("list_json", [] { return spraylab::canonical_dump(spraylab::list_json()); });

    const auto run = [](bool verify) {
        return [verify](const std::string& spray, const std::optional<std::string>& file,
                        const std::vector<std::string>& sigmas, int points, std::uint64_t seed, int order,
                        const std::vector<std::string>& tol, const std::string& format) {
            const auto cfg = make_config(spray, file, sigmas, points, seed, order, tol);
            spraylab::Report r;
            {
                py::gil_scoped_release release;
                r = verify ? spraylab::cmd_verify(cfg) : spraylab::cmd_evaluate(cfg);
            }
            const auto f = format == "text" ? spraylab::OutputFormat::Text : spraylab::OutputFormat::Json;
            return py::make_tuple(spraylab::render(r, f), r.exit_code());
        };
    };
    m.def("evaluate", run(false), py::arg("spray") = "flat", py::arg("file") = py::none(),
          py::arg("sigmas") = std::vector<std::string>{}, py::arg("points") = 0, py::arg("seed") = 1,
          py::arg("order") = spraylab::kDefaultOrder, py::arg("tol") = std::vector<std::string>{},
          py::arg("format") = "json", "(report, exit_code) for the evaluate command");
    m.def("verify", run(true), py::arg("spray") = "flat", py::arg("file") = py::none(),
          py::arg("sigmas") = std::vector<std::string>{}, py::arg("points") = 0, py::arg("seed") = 1,
          py::arg("order") = spraylab::kDefaultOrder, py::arg("tol") = std::vector<std::string>{},
          py::arg("format") = "json", "(report, exit_code) for the verify command");
}
