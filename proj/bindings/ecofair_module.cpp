#include "ecofair/cli.hpp"
#include "ecofair/energy.hpp"
#include "ecofair/error.hpp"
#include "ecofair/harness.hpp"
#include "ecofair/metrics.hpp"
#include "ecofair/risk.hpp"
#include "ecofair/routing.hpp"
#include "ecofair/sweep.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace ecofair;
using nlohmann::json;

namespace {

Sample sample_from_dict(const py::dict& d) {
    Sample s;
    s.id = d.contains("id") ? d["id"].cast<std::string>() : "";
    s.label = d["label"].cast<std::size_t>();
    if (d.contains("age") && !d["age"].is_none()) s.age = d["age"].cast<double>();
    if (d.contains("localization") && !d["localization"].is_none())
        s.localization = d["localization"].cast<std::string>();
    if (d.contains("subgroup") && !d["subgroup"].is_none())
        s.subgroup = d["subgroup"].cast<std::string>();
    return s;
}

py::dict decision_to_dict(const RouteDecision& d) {
    py::dict out;
    out["sample_id"] = d.sample_id;
    out["gate"] = d.gate;
    out["entropy"] = d.entropy;
    out["norm_entropy"] = d.norm_entropy;
    out["delta"] = d.delta;
    out["ambiguity"] = d.ambiguity;
    if (d.score.has_value()) out["score"] = *d.score;
    else out["score"] = py::none();
    out["tab_risk"] = d.tab_risk;
    out["trigger_reason"] = d.trigger_reason.label();
    return out;
}

py::dict account_to_dict(const energy::EnergyAccount& a) {
    py::dict out;
    out["e_lite"] = a.e_lite;
    out["e_heavy"] = a.e_heavy;
    out["e_ecofair"] = a.e_ecofair;
    out["routing_pct"] = a.routing_pct;
    out["savings_vs_heavy"] = a.savings_vs_heavy;
    out["savings_vs_lite"] = a.savings_vs_lite;
    return out;
}

} // namespace

PYBIND11_MODULE(_ecofair, m) {
    m.doc() = "native core: routing signals, risk scoring, energy accounting, metrics, "
              "Pareto extraction and the CV harness";

    py::register_exception<Error>(m, "EcofairError");

    py::class_<ClassTaxonomy>(m, "ClassTaxonomy")
        .def(py::init([](std::vector<std::string> class_names, std::vector<std::size_t> safe,
                         std::vector<std::size_t> danger, std::vector<std::size_t> malignant) {
                 ClassTaxonomy t;
                 t.class_names = std::move(class_names);
                 t.safe_set = std::move(safe);
                 t.danger_set = std::move(danger);
                 t.malignant_set = std::move(malignant);
                 return validate_taxonomy(std::move(t));
             }),
             py::arg("class_names"), py::arg("safe"), py::arg("danger"), py::arg("malignant"))
        .def_readonly("class_names", &ClassTaxonomy::class_names)
        .def_readonly("safe_set", &ClassTaxonomy::safe_set)
        .def_readonly("danger_set", &ClassTaxonomy::danger_set)
        .def_readonly("malignant_set", &ClassTaxonomy::malignant_set)
        .def("is_malignant", &ClassTaxonomy::is_malignant)
        .def("num_classes", &ClassTaxonomy::num_classes);

    py::class_<RoutingConfig>(m, "RoutingConfig")
        .def(py::init([](const std::string& gate_mode, double lambda_h, double lambda_delta,
                         double tau_r, double tau_h, double tau_delta, double tau_risk,
                         const std::string& heavy_transmission) {
                 RoutingConfig cfg;
                 cfg.gate_mode = gate_mode_from_string(gate_mode);
                 cfg.lambda_h = lambda_h;
                 cfg.lambda_delta = lambda_delta;
                 cfg.tau_r = tau_r;
                 cfg.tau_h = tau_h;
                 cfg.tau_delta = tau_delta;
                 cfg.tau_risk = tau_risk;
                 cfg.heavy_transmission = transmission_from_string(heavy_transmission);
                 validate_routing_config(cfg);
                 return cfg;
             }),
             py::arg("gate_mode") = "trigger", py::arg("lambda_h") = 0.5,
             py::arg("lambda_delta") = 0.5, py::arg("tau_r") = 0.5, py::arg("tau_h") = 0.5,
             py::arg("tau_delta") = 0.8, py::arg("tau_risk") = 0.6,
             py::arg("heavy_transmission") = "replace")
        .def_readwrite("lambda_h", &RoutingConfig::lambda_h)
        .def_readwrite("lambda_delta", &RoutingConfig::lambda_delta)
        .def_readwrite("tau_r", &RoutingConfig::tau_r)
        .def_readwrite("tau_h", &RoutingConfig::tau_h)
        .def_readwrite("tau_delta", &RoutingConfig::tau_delta)
        .def_readwrite("tau_risk", &RoutingConfig::tau_risk);

    py::class_<risk::RiskModel>(m, "RiskModel")
        .def_readonly("a_min", &risk::RiskModel::a_min)
        .def_readonly("a_max", &risk::RiskModel::a_max)
        .def_readonly("mal_rate", &risk::RiskModel::mal_rate)
        .def_readonly("max_rate", &risk::RiskModel::max_rate)
        .def_readonly("fallback_rate", &risk::RiskModel::fallback_rate)
        .def_readonly("fallback_age_score", &risk::RiskModel::fallback_age_score)
        .def("age_score",
             [](const risk::RiskModel& m, std::optional<double> age) {
                 return risk::age_score(age, m);
             })
        .def("loc_score",
             [](const risk::RiskModel& m, std::optional<std::string> loc) {
                 return risk::loc_score(loc, m);
             })
        .def("tab_risk",
             [](const risk::RiskModel& m, std::optional<double> age,
                std::optional<std::string> loc) {
                 Sample s;
                 s.age = age;
                 s.localization = std::move(loc);
                 return risk::tab_risk(s, m);
             },
             py::arg("age"), py::arg("localization"))
        .def("to_json", [](const risk::RiskModel& m) { return io::risk_model_to_json(m).dump(); })
        .def_static("from_json", [](const std::string& s) {
            return io::risk_model_from_json(json::parse(s));
        });

    m.def("calibrate_risk",
          [](const std::vector<py::dict>& rows, const ClassTaxonomy& taxonomy) {
              std::vector<Sample> samples;
              samples.reserve(rows.size());
              for (const py::dict& d : rows) samples.push_back(sample_from_dict(d));
              return risk::calibrate(samples, taxonomy);
          },
          py::arg("samples"), py::arg("taxonomy"),
          "Calibrate a risk model from rows of {label, age?, localization?}");

    m.def("validate_distribution",
          [](std::vector<double> probs) { return validate_distribution(std::move(probs)).probs; });
    m.def("entropy",
          [](std::vector<double> probs) {
              return routing::entropy(validate_distribution(std::move(probs)));
          },
          "Shannon entropy in nats");
    m.def("norm_entropy", [](std::vector<double> probs) {
        return routing::norm_entropy(validate_distribution(std::move(probs)));
    });
    m.def("safe_danger_gap",
          [](std::vector<double> probs, const ClassTaxonomy& t) {
              const auto g =
                  routing::safe_danger_gap(validate_distribution(std::move(probs)), t);
              return py::make_tuple(g.p_safe, g.p_danger, g.delta);
          },
          "Returns (p_safe, p_danger, delta)");
    m.def("ambiguity", &routing::ambiguity);
    m.def("routing_score", [](double norm_entropy, double ambiguity, double lambda_h,
                              double lambda_delta) {
        RoutingConfig cfg;
        cfg.lambda_h = lambda_h;
        cfg.lambda_delta = lambda_delta;
        return routing::routing_score(norm_entropy, ambiguity, cfg);
    });
    m.def("route",
          [](std::vector<double> lite_probs, const ClassTaxonomy& t, double tab_risk,
             const RoutingConfig& cfg) {
              const auto signals = routing::compute_signals(
                  validate_distribution(std::move(lite_probs)), t, tab_risk);
              return decision_to_dict(routing::gate("", signals, cfg));
          },
          py::arg("lite_probs"), py::arg("taxonomy"), py::arg("tab_risk"), py::arg("config"),
          "Gate one sample from its lite-pathway distribution and tabular risk");

    m.def("account", [](double e_lite, double e_heavy, double routing_rate) {
        return account_to_dict(energy::account_from_rate(e_lite, e_heavy, routing_rate));
    });
    m.def("breakeven_rate",
          py::overload_cast<double, double>(&energy::breakeven_rate));

    m.def("confusion", [](std::vector<std::size_t> labels, std::vector<std::size_t> preds,
                          std::size_t num_classes) {
        return metrics::confusion(labels, preds, num_classes);
    });
    m.def("macro_f1", [](const metrics::Confusion& m) { return metrics::macro_f1(m); });
    m.def("balanced_accuracy",
          [](const metrics::Confusion& m) { return metrics::balanced_accuracy(m); });
    m.def("malignant_recall", [](std::vector<std::size_t> labels, std::vector<std::size_t> preds,
                                 const ClassTaxonomy& t) {
        return metrics::malignant_recall(labels, preds, t);
    });

    py::class_<metrics::FairnessReport>(m, "FairnessReport")
        .def_readonly("tpr_mean", &metrics::FairnessReport::tpr_mean)
        .def_readonly("tpr_worst", &metrics::FairnessReport::tpr_worst)
        .def_readonly("tpr_gap", &metrics::FairnessReport::tpr_gap)
        .def_property_readonly("per_subgroup",
                               [](const metrics::FairnessReport& r) {
                                   py::dict d;
                                   for (const auto& g : r.per_subgroup)
                                       d[py::str(g.subgroup)] = g.tpr;
                                   return d;
                               })
        .def_property_readonly("excluded", [](const metrics::FairnessReport& r) {
            py::dict d;
            for (const auto& e : r.excluded) d[py::str(e.subgroup)] = e.count;
            return d;
        });

    m.def("fairness",
          [](std::vector<std::size_t> labels, std::vector<std::size_t> preds,
             std::vector<std::optional<std::string>> subgroups, const ClassTaxonomy& t) {
              return metrics::fairness(labels, preds, subgroups, t);
          },
          py::arg("labels"), py::arg("predictions"), py::arg("subgroups"), py::arg("taxonomy"));
    m.def("fairness_delta",
          [](const metrics::FairnessReport& eco, const metrics::FairnessReport& baseline) {
              const auto d = metrics::fairness_delta(eco, baseline);
              return py::make_tuple(d.wg_tpr, d.gap);
          },
          "Returns (delta_wg_tpr, delta_gap); positive means improvement");
    m.def("aggregate_folds", [](std::vector<double> values) {
        const auto ms = metrics::aggregate_folds(values);
        return py::make_tuple(ms.mean, ms.std);
    });

    m.def("pareto_indices",
          [](std::vector<std::pair<double, double>> energy_wg) {
              return sweep::pareto_indices(energy_wg);
          },
          py::arg("points"),
          "Frontier indices for (energy, wg_tpr) pairs, sorted by ascending energy");

    m.def("synth",
          [](const std::string& spec_json, const std::string& out_dir) {
              const SynthSpec spec = harness::parse_synth_spec(json::parse(spec_json));
              const Dataset d = synth_generate(spec);
              return io::write_dataset_files(out_dir, d).size();
          },
          py::arg("spec_json"), py::arg("out_dir"),
          "Generate a synthetic dataset export; returns the number of files written");

    m.def("run",
          [](const std::string& config_json) {
              const harness::RunConfig cfg =
                  harness::parse_run_config(json::parse(config_json));
              py::gil_scoped_release release;
              const harness::RunReport report = harness::run_cv(cfg);
              const std::string out = harness::run_report_to_json(report).dump();
              py::gil_scoped_acquire acquire;
              return out;
          },
          py::arg("config_json"),
          "Run the CV protocol from a config JSON string; writes the configured output "
          "directory and returns the report JSON");

    m.def("cli", [](const std::vector<std::string>& args) { return cli::run_cli(args); },
          py::arg("args"), "Invoke the command-line interface in-process");

    m.attr("__version__") = "0.1.0";
}
