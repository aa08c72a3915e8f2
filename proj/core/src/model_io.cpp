#include "enscal/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "enscal/dates.hpp"

namespace enscal {

namespace {

using nlohmann::json;

json spec_to_json(const GroupSpec& spec) {
  json groups = json::array();
  for (const auto& g : spec.groups()) {
    groups.push_back({{"name", g.name}, {"size", g.size}});
  }
  return groups;
}

GroupSpec spec_from_json(const json& j) {
  std::vector<GroupSpec::Group> groups;
  for (const auto& g : j) {
    groups.push_back({g.at("name").get<std::string>(), g.at("size").get<int>()});
  }
  return GroupSpec(std::move(groups));
}

} // namespace

ModelDocument make_document(const BmaModel& model, long issue_day,
                            int lead_time_h, double lambda, double lower_cm,
                            double upper_cm) {
  ModelDocument doc;
  doc.model_type = "bma";
  doc.variant = to_string(model.variant);
  doc.issue_day = issue_day;
  doc.lead_time_h = lead_time_h;
  doc.lambda = lambda;
  doc.lower_cm = lower_cm;
  doc.upper_cm = upper_cm;
  doc.lower_t = model.lower;
  doc.upper_t = model.upper;
  doc.group_spec = model.group_spec;
  doc.weights = model.weights;
  doc.alpha = model.alpha;
  doc.beta = model.beta;
  doc.sigma = model.sigma;
  doc.iterations = model.diagnostics.iterations;
  doc.objective = model.diagnostics.final_log_likelihood;
  doc.converged = model.diagnostics.converged;
  return doc;
}

ModelDocument make_document(const EmosModel& model, long issue_day,
                            int lead_time_h, double lambda, double lower_cm,
                            double upper_cm) {
  ModelDocument doc;
  doc.model_type = "emos";
  doc.issue_day = issue_day;
  doc.lead_time_h = lead_time_h;
  doc.lambda = lambda;
  doc.lower_cm = lower_cm;
  doc.upper_cm = upper_cm;
  doc.lower_t = model.lower;
  doc.upper_t = model.upper;
  doc.group_spec = model.group_spec;
  doc.a = model.a;
  doc.b0 = model.b0;
  doc.b1 = model.b1;
  doc.iterations = model.diagnostics.evaluations;
  doc.objective = model.diagnostics.final_mean_crps;
  doc.converged = model.diagnostics.converged;
  return doc;
}

std::string model_name(const ModelDocument& doc) {
  if (doc.model_type == "emos") return "emos";
  return "bma_" + doc.variant;
}

std::string to_json(const ModelDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["model_type"] = doc.model_type;
  if (!doc.variant.empty()) j["variant"] = doc.variant;
  j["issue_date"] = format_date(doc.issue_day);
  j["lead_time_h"] = doc.lead_time_h;
  j["lambda"] = doc.lambda;
  j["bounds_cm"] = {doc.lower_cm, doc.upper_cm};
  j["bounds_transformed"] = {doc.lower_t, doc.upper_t};
  j["groups"] = spec_to_json(doc.group_spec);
  if (doc.model_type == "bma") {
    j["weights"] = doc.weights;
    j["alpha"] = doc.alpha;
    j["beta"] = doc.beta;
    j["sigma"] = doc.sigma;
  } else {
    j["a"] = doc.a;
    j["b0"] = doc.b0;
    j["b1"] = doc.b1;
  }
  j["diagnostics"] = {{"iterations", doc.iterations},
                      {"objective", doc.objective},
                      {"converged", doc.converged}};
  return j.dump(2);
}

ModelDocument document_from_json(const std::string& text) {
  const json j = json::parse(text);
  ModelDocument doc;
  doc.schema_version = j.at("schema_version").get<int>();
  if (doc.schema_version != 1) {
    throw std::runtime_error("unsupported model document schema_version " +
                             std::to_string(doc.schema_version));
  }
  doc.model_type = j.at("model_type").get<std::string>();
  doc.variant = j.value("variant", std::string{});
  doc.issue_day = parse_date(j.at("issue_date").get<std::string>());
  doc.lead_time_h = j.at("lead_time_h").get<int>();
  doc.lambda = j.at("lambda").get<double>();
  doc.lower_cm = j.at("bounds_cm")[0].get<double>();
  doc.upper_cm = j.at("bounds_cm")[1].get<double>();
  doc.lower_t = j.at("bounds_transformed")[0].get<double>();
  doc.upper_t = j.at("bounds_transformed")[1].get<double>();
  doc.group_spec = spec_from_json(j.at("groups"));
  if (doc.model_type == "bma") {
    doc.weights = j.at("weights").get<std::vector<double>>();
    doc.alpha = j.at("alpha").get<std::vector<double>>();
    doc.beta = j.at("beta").get<std::vector<double>>();
    doc.sigma = j.at("sigma").get<double>();
  } else if (doc.model_type == "emos") {
    doc.a = j.at("a").get<std::vector<double>>();
    doc.b0 = j.at("b0").get<double>();
    doc.b1 = j.at("b1").get<double>();
  } else {
    throw std::runtime_error("unknown model_type: " + doc.model_type);
  }
  const auto& diag = j.at("diagnostics");
  doc.iterations = diag.at("iterations").get<int>();
  doc.objective = diag.at("objective").get<double>();
  doc.converged = diag.at("converged").get<bool>();
  return doc;
}

void write_document(const std::string& path, const ModelDocument& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model document: " + path);
  out << to_json(doc) << '\n';
}

ModelDocument read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model document: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return document_from_json(ss.str());
}

BmaModel bma_from_document(const ModelDocument& doc) {
  BmaModel m;
  m.group_spec = doc.group_spec;
  m.weights = doc.weights;
  m.alpha = doc.alpha;
  m.beta = doc.beta;
  m.sigma = doc.sigma;
  m.lower = doc.lower_t;
  m.upper = doc.upper_t;
  m.variant = bma_variant_from_string(doc.variant);
  return m;
}

EmosModel emos_from_document(const ModelDocument& doc) {
  EmosModel m;
  m.group_spec = doc.group_spec;
  m.a = doc.a;
  m.b0 = doc.b0;
  m.b1 = doc.b1;
  m.lower = doc.lower_t;
  m.upper = doc.upper_t;
  return m;
}

} // namespace enscal
