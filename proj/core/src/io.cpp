#include "odekernel/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include <json.hpp>

#include "odekernel/errors.hpp"
#include "odekernel/systems.hpp"

namespace odekernel {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw IoError("could not parse number '" + std::string(text) + "'");
  }
  return value;
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
  trajectory.validate();
  std::string out = "t";
  for (int i = 1; i <= trajectory.dim(); ++i) out += ",u" + std::to_string(i);
  out += "\n";
  for (std::size_t row = 0; row < trajectory.sample_count(); ++row) {
    out += format_double(trajectory.times[row]);
    for (double v : trajectory.states[row].data()) {
      out += ",";
      out += format_double(v);
    }
    out += "\n";
  }
  return out;
}

Trajectory trajectory_from_csv(std::string_view text) {
  Trajectory trajectory;
  std::size_t pos = 0;
  bool header = true;
  int dim = -1;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      if (!line.starts_with("t")) throw IoError("trajectory csv: missing header");
      header = false;
      continue;
    }
    std::vector<double> fields;
    std::size_t at = 0;
    while (at <= line.size()) {
      std::size_t comma = line.find(',', at);
      if (comma == std::string_view::npos) comma = line.size();
      fields.push_back(parse_double(line.substr(at, comma - at)));
      at = comma + 1;
    }
    if (fields.size() < 2) throw IoError("trajectory csv: row needs time and state");
    if (dim < 0) dim = static_cast<int>(fields.size()) - 1;
    if (static_cast<int>(fields.size()) - 1 != dim) {
      throw IoError("trajectory csv: inconsistent column count");
    }
    trajectory.times.push_back(fields[0]);
    trajectory.states.emplace_back(dim, 1,
                                   std::vector<double>(fields.begin() + 1, fields.end()));
  }
  trajectory.validate();
  return trajectory;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  write_text_file(path, trajectory_to_csv(trajectory));
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  return trajectory_from_csv(read_text_file(path));
}

void write_error_csv(const std::filesystem::path& path, std::span<const double> times,
                     std::span<const double> eps) {
  if (times.size() != eps.size()) throw InvalidInputError("error csv: length mismatch");
  std::string out = "t,eps\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += format_double(times[i]);
    out += ",";
    out += format_double(eps[i]);
    out += "\n";
  }
  write_text_file(path, out);
}

namespace {

json params_to_json(const Model& model) {
  const Tensor flat = model.params();
  json arr = json::array();
  for (double v : flat.data()) arr.push_back(v);
  return arr;
}

Tensor params_from_json(const json& arr) {
  std::vector<double> data;
  data.reserve(arr.size());
  for (const auto& v : arr) data.push_back(v.get<double>());
  return Tensor::column(std::move(data));
}

}  // namespace

std::string model_to_json(const Model& model) {
  json doc;
  doc["kind"] = model.kind();
  if (model.kind() == "kernel") {
    const auto& m = dynamic_cast<const ParametricPolyKernel&>(model);
    doc["dims"] = {{"d_in", m.input_dim()}, {"d_out", m.output_dim()}, {"m", m.intermediate_dim()}};
    doc["order"] = m.order();
    doc["params"] = params_to_json(model);
  } else if (model.kind() == "mlp") {
    const auto& m = dynamic_cast<const Mlp&>(model);
    doc["dims"] = {{"widths", m.widths()}};
    doc["params"] = params_to_json(model);
  } else if (model.kind() == "polyfeature") {
    const auto& m = dynamic_cast<const PolyFeatureModel&>(model);
    doc["dims"] = {{"n_vars", m.input_dim()}};
    doc["params"] = params_to_json(model);
    (void)m;
  } else if (model.kind() == "lorenz96") {
    const auto& m = dynamic_cast<const Lorenz96Model&>(model);
    doc["dims"] = {{"n", m.system().n}, {"f", m.system().f}};
    doc["params"] = json::array();
  } else if (model.kind() == "ridge") {
    const auto& m = dynamic_cast<const RidgeModel&>(model);
    const KernelRidge& fit = m.fitted();
    doc["dims"] = {{"d_in", fit.d_in},
                   {"d_out", fit.d_out},
                   {"n_support", static_cast<int>(fit.support_x.size())},
                   {"b", fit.b},
                   {"c", fit.c},
                   {"lambda", fit.lambda}};
    doc["order"] = fit.d;
    json arr = json::array();
    for (const Tensor& x : fit.support_x) {
      for (double v : x.data()) arr.push_back(v);
    }
    for (double v : fit.alpha.data()) arr.push_back(v);
    doc["params"] = std::move(arr);
  } else {
    throw IoError("model_to_json: unknown kind '" + model.kind() + "'");
  }
  return doc.dump(2) + "\n";
}

std::unique_ptr<Model> model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model json: ") + e.what());
  }
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "kernel") {
    const auto& dims = doc.at("dims");
    auto model = std::make_unique<ParametricPolyKernel>(
        dims.at("d_in").get<int>(), dims.at("d_out").get<int>(), dims.at("m").get<int>(),
        doc.at("order").get<int>());
    model->set_params(params_from_json(doc.at("params")));
    return model;
  }
  if (kind == "mlp") {
    auto model = std::make_unique<Mlp>(doc.at("dims").at("widths").get<std::vector<int>>());
    model->set_params(params_from_json(doc.at("params")));
    return model;
  }
  if (kind == "polyfeature") {
    auto model = std::make_unique<PolyFeatureModel>(doc.at("dims").at("n_vars").get<int>());
    model->set_params(params_from_json(doc.at("params")));
    return model;
  }
  if (kind == "lorenz96") {
    const auto& dims = doc.at("dims");
    return std::make_unique<Lorenz96Model>(
        Lorenz96Params{dims.at("n").get<int>(), dims.at("f").get<double>()});
  }
  if (kind == "ridge") {
    const auto& dims = doc.at("dims");
    KernelRidge fit;
    fit.d_in = dims.at("d_in").get<int>();
    fit.d_out = dims.at("d_out").get<int>();
    fit.b = dims.at("b").get<double>();
    fit.c = dims.at("c").get<double>();
    fit.lambda = dims.at("lambda").get<double>();
    fit.d = doc.at("order").get<int>();
    const int n_support = dims.at("n_support").get<int>();
    const Tensor flat = params_from_json(doc.at("params"));
    const std::size_t expect =
        static_cast<std::size_t>(n_support) * (fit.d_in + fit.d_out);
    if (flat.size() != expect) throw IoError("model json: ridge parameter count mismatch");
    std::size_t at = 0;
    for (int i = 0; i < n_support; ++i) {
      Tensor x(fit.d_in, 1);
      for (int j = 0; j < fit.d_in; ++j) x[j] = flat[at++];
      fit.support_x.push_back(std::move(x));
    }
    fit.alpha = Tensor(n_support, fit.d_out);
    for (double& v : fit.alpha.data()) v = flat[at++];
    return std::make_unique<RidgeModel>(std::move(fit));
  }
  throw IoError("model json: unknown kind '" + kind + "'");
}

void save_model(const std::filesystem::path& path, const Model& model) {
  write_text_file(path, model_to_json(model));
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

std::string report_to_json(const TrainingReport& report, std::size_t max_history_points) {
  json doc;
  doc["final_loss"] = report.final_loss;
  json history = json::array();
  const std::size_t n = report.loss_history.size();
  if (n > 0) {
    const std::size_t stride = (n + max_history_points - 1) / max_history_points;
    for (std::size_t i = 0; i < n; i += stride) history.push_back(report.loss_history[i]);
    if ((n - 1) % stride != 0) history.push_back(report.loss_history[n - 1]);
  }
  doc["loss_history"] = std::move(history);
  json phases = json::array();
  for (const Phase& p : report.schedule.phases) {
    phases.push_back({{"iterations", p.iterations}, {"learning_rate", p.learning_rate}});
  }
  doc["phases"] = std::move(phases);
  doc["seed"] = report.seed;
  doc["wall_ms"] = report.wall_ms;
  return doc.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

}  // namespace odekernel
