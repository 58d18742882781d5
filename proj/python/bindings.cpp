#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "wnav/bench.hpp"
#include "wnav/classic.hpp"
#include "wnav/dpwa.hpp"
#include "wnav/error.hpp"
#include "wnav/focus.hpp"
#include "wnav/raster.hpp"
#include "wnav/scott.hpp"

namespace py = pybind11;
using namespace wnav;
using nlohmann::json;

// Structured values cross the boundary as JSON text; the Python package decodes them.

namespace {

PlanRequest make_request(const GridMap& map, std::pair<double, double> start, std::pair<double, double> goal,
                         double threshold, double epsilon) {
    return {map.cell_of({start.first, start.second}), map.cell_of({goal.first, goal.second}), threshold, epsilon};
}

std::string result_text(const PlanResult& r) { return to_json(r).dump(); }

py::bytes png_bytes(const Raster& img) {
    const auto data = encode_png(img);
    return py::bytes(reinterpret_cast<const char*>(data.data()), data.size());
}

}  // namespace

PYBIND11_MODULE(_wnav, m) {
    m.doc() = "Wireless-aware path planning on radio maps";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<TransportError>(m, "TransportError", PyExc_RuntimeError);

    py::class_<GridMap>(m, "GridMap")
        .def_property_readonly("width", &GridMap::width)
        .def_property_readonly("height", &GridMap::height)
        .def_property_readonly("cell_size", &GridMap::cell_size)
        .def_property_readonly("traversable_count", &GridMap::traversable_count)
        .def("gain", [](const GridMap& g, int col, int row) {
            if (!g.contains({col, row})) throw InputError("cell outside the map");
            return g.gain({col, row});
        })
        .def("is_obstacle", [](const GridMap& g, int col, int row) {
            if (!g.contains({col, row})) throw InputError("cell outside the map");
            return g.is_obstacle({col, row});
        })
        .def("cell_of", [](const GridMap& g, double x, double y) {
            const CellIndex c = g.cell_of({x, y});
            return std::make_pair(c.col, c.row);
        })
        .def("center", [](const GridMap& g, int col, int row) {
            const WorldPoint p = g.center({col, row});
            return std::make_pair(p.x, p.y);
        })
        .def("export_json", [](const GridMap& g) { return export_radio_map_text(g); })
        .def("hash", [](const GridMap& g) { return map_hash(g); });

    m.def("ingest_radio_map", [](const std::string& doc) { return ingest_radio_map(doc); }, py::arg("document"));
    m.def("load_radio_map", [](const std::string& path) { return load_radio_map(path); }, py::arg("path"));
    m.def("synthesize_map", [](const std::string& spec) { return synthesize_map(synth_spec_from_json(json::parse(spec))); },
          py::arg("spec_json"));

    m.def("plan_astar", [](const GridMap& g, std::pair<double, double> s, std::pair<double, double> t, double G) {
        return result_text(plan_astar(g, make_request(g, s, t, G, 1e-6)));
    }, py::arg("map"), py::arg("start"), py::arg("goal"), py::arg("threshold") = 0.0);
    m.def("plan_nwa", [](const GridMap& g, std::pair<double, double> s, std::pair<double, double> t, double G,
                         double eps) { return result_text(plan_nwa(g, make_request(g, s, t, G, eps))); },
          py::arg("map"), py::arg("start"), py::arg("goal"), py::arg("threshold") = 0.0, py::arg("epsilon") = 1e-6);
    m.def("plan_dpwa", [](const GridMap& g, std::pair<double, double> s, std::pair<double, double> t, double G,
                          std::optional<int> horizon, bool prune) {
        py::gil_scoped_release release;
        return result_text(plan_dpwa(g, make_request(g, s, t, G, 1e-6), DpOptions{horizon, prune}));
    }, py::arg("map"), py::arg("start"), py::arg("goal"), py::arg("threshold"), py::arg("horizon") = py::none(),
          py::arg("prune") = true);
    m.def("state_count", &state_count, py::arg("map"), py::arg("horizon"));

    m.def("render_heatmap_png", [](const GridMap& g, int pixels_per_cell) {
        RenderOptions o;
        o.pixels_per_cell = pixels_per_cell;
        return png_bytes(render_heatmap(g, {}, o));
    }, py::arg("map"), py::arg("pixels_per_cell") = 8);

    m.def("oracle_mock_script", [](const GridMap& g, std::pair<double, double> s, std::pair<double, double> t,
                                   double G, const std::string& config) {
        return make_oracle_script(g, make_request(g, s, t, G, 1e-6), scott_config_from_json(json::parse(config))).dump();
    }, py::arg("map"), py::arg("start"), py::arg("goal"), py::arg("threshold"), py::arg("config_json") = "{}");
    m.def("run_scott_mock", [](const GridMap& g, std::pair<double, double> s, std::pair<double, double> t, double G,
                               const std::string& script, const std::string& config) {
        MockClient client = MockClient::from_json(json::parse(script));
        const ScottOutcome out =
            run_scott(g, make_request(g, s, t, G, 1e-6), scott_config_from_json(json::parse(config)), client);
        json j = to_json(out.transcript, false);
        j["result"] = out.ok() ? to_json(out.result) : json(nullptr);
        return j.dump();
    }, py::arg("map"), py::arg("start"), py::arg("goal"), py::arg("threshold"), py::arg("script_json"),
          py::arg("config_json") = "{}");

    m.def("run_scenario_table", [](const std::string& path, const std::string& format, std::optional<int> runs) {
        Scenario s = load_scenario(path);
        if (runs) s.runs = *runs;
        py::gil_scoped_release release;
        const ScenarioReport rep = run_scenario(s);
        return emit_table(rep.rows, parse_table_format(format));
    }, py::arg("path"), py::arg("format") = "json", py::arg("runs") = py::none());
}
