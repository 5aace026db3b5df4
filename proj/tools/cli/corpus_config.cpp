#include "cli/corpus_config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "onsager/errors.hpp"
#include "onsager/space_io.hpp"

namespace onsager::cli {

namespace {

using nlohmann::json;

double parse_decimal(const std::string& s) {
  if (s.empty()) throw InputError("empty number");
  const bool allowed = std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E';
  });
  if (!allowed) throw InputError("'" + s + "' is not a decimal number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw InputError("'" + s + "' is not a decimal number");
  }
  return v;
}

std::vector<double> parse_one(const std::string& item) {
  const auto first = item.find(':');
  if (first == std::string::npos) return {parse_decimal(item)};
  const auto second = item.find(':', first + 1);
  if (second == std::string::npos || item.find(':', second + 1) != std::string::npos) {
    throw InputError("range '" + item + "' must have the form min:max:steps");
  }
  const double lo = parse_decimal(item.substr(0, first));
  const double hi = parse_decimal(item.substr(first + 1, second - first - 1));
  const std::string steps_text = item.substr(second + 1);
  if (steps_text.empty() || !std::all_of(steps_text.begin(), steps_text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw InputError("range '" + item + "': steps must be a positive integer");
  }
  const long steps = std::strtol(steps_text.c_str(), nullptr, 10);
  if (steps < 1 || steps > 1000000) throw InputError("range '" + item + "': steps must be in [1, 1e6]");
  if (hi < lo) throw InputError("range '" + item + "': max < min");
  if (steps == 1) {
    if (hi != lo) throw InputError("range '" + item + "': one step needs min == max");
    return {lo};
  }
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (long i = 0; i < steps; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  out.back() = hi;
  return out;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw InputError("config field '" + field + "' must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw InputError("config field '" + field + "' must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw InputError("config field '" + field + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, field));
  return out;
}

DiscreteCorpusSpace parse_space(const json& j, const std::string& base_dir, std::size_t default_n, TriangleCheck check,
                                bool& circle) {
  if (!j.is_object() || !j.contains("type")) throw InputError("config field 'space' needs a 'type'");
  const std::string type = j.at("type").get<std::string>();
  circle = false;
  if (type == "circle") {
    const std::size_t n = j.contains("n") ? count(j.at("n"), "space.n") : default_n;
    circle = true;
    return DiscreteCorpusSpace::circle(n);
  }
  if (type == "file") {
    if (!j.contains("path")) throw InputError("config field 'space.path' is required for file spaces");
    std::filesystem::path p = j.at("path").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return load_space(p.string(), check);
  }
  if (type == "inline") {
    if (!j.contains("distances")) throw InputError("config field 'space.distances' is required for inline spaces");
    const auto& rows = j.at("distances");
    if (!rows.is_array() || rows.empty()) throw InputError("config field 'space.distances' must be a square array");
    const std::size_t m = rows.size();
    std::vector<double> dist;
    for (const auto& row : rows) {
      const auto r = number_list(row, "space.distances");
      if (r.size() != m) throw InputError("config field 'space.distances' is not square");
      dist.insert(dist.end(), r.begin(), r.end());
    }
    std::vector<double> w = j.contains("weights") ? number_list(j.at("weights"), "space.weights")
                                                  : std::vector<double>(m, 1.0 / static_cast<double>(m));
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
    return DiscreteCorpusSpace(std::move(dist), std::move(w), std::move(labels), check);
  }
  throw InputError("unknown space type '" + type + "'");
}

KernelSpec parse_kernel(const json& j, double max_distance) {
  if (!j.is_object() || !j.contains("name")) throw InputError("config kernel needs a 'name'");
  const double parameter = j.contains("parameter") ? number(j.at("parameter"), "kernel.parameter") : 1.0;
  KernelSpec k = make_kernel(j.at("name").get<std::string>(), parameter, max_distance);
  if (j.contains("shift")) k = k.shifted(number(j.at("shift"), "kernel.shift"));
  return k;
}

double smallest_positive_distance(const DiscreteCorpusSpace& space) {
  double best = std::numeric_limits<double>::infinity();
  for (double d : space.distances()) {
    if (d > 0.0) best = std::min(best, d);
  }
  return std::isfinite(best) ? best : 0.0;
}

}  // namespace

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto part = parse_one(item);
    out.insert(out.end(), part.begin(), part.end());
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

CorpusConfig parse_corpus_config(const json& doc, const std::string& base_dir, std::size_t default_n,
                                 TriangleCheck check) {
  try {
    if (!doc.is_object()) throw InputError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      static const std::vector<std::string> known = {"space", "kernel", "kernels", "b", "solver", "damping", "tol",
                                                     "max_iter", "restarts", "concentrated_starts", "seed", "perturbation", "init", "eps"};
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw InputError("unknown config field '" + key + "'");
      }
      (void)value;
    }
    CorpusConfig cfg;
    if (!doc.contains("space")) throw InputError("config field 'space' is required");
    const auto& sp = doc.at("space");
    if (sp.is_object() && sp.value("type", "") == "product") {
      cfg.product = true;
      if (!sp.contains("components") || !sp.at("components").is_array() || sp.at("components").size() < 2) {
        throw InputError("config field 'space.components' needs at least two spaces");
      }
      for (const auto& c : sp.at("components")) {
        bool circle = false;
        cfg.components.push_back(parse_space(c, base_dir, default_n, check, circle));
        cfg.is_circle.push_back(circle);
      }
      if (!doc.contains("kernels") && !doc.contains("kernel")) throw InputError("config field 'kernels' is required");
      if (doc.contains("kernels")) {
        const auto& ks = doc.at("kernels");
        if (!ks.is_array() || ks.size() != cfg.components.size()) {
          throw InputError("config field 'kernels' needs one kernel per component");
        }
        for (std::size_t j = 0; j < ks.size(); ++j) cfg.kernels.push_back(parse_kernel(ks[j], cfg.components[j].diameter()));
      } else {
        for (const auto& c : cfg.components) cfg.kernels.push_back(parse_kernel(doc.at("kernel"), c.diameter()));
      }
    } else {
      bool circle = false;
      cfg.components.push_back(parse_space(sp, base_dir, default_n, check, circle));
      cfg.is_circle.push_back(circle);
      if (!doc.contains("kernel")) throw InputError("config field 'kernel' is required");
      cfg.kernels.push_back(parse_kernel(doc.at("kernel"), cfg.components[0].diameter()));
    }
    cfg.mesh = smallest_positive_distance(cfg.components[0]);

    if (!doc.contains("b")) throw InputError("config field 'b' is required");
    const auto& b = doc.at("b");
    if (b.is_number()) {
      cfg.b_values = {b.get<double>()};
    } else if (b.is_string()) {
      cfg.b_values = parse_values(b.get<std::string>());
    } else {
      cfg.b_values = number_list(b, "b");
    }
    if (cfg.b_values.empty()) throw InputError("config field 'b' is empty");
    for (double x : cfg.b_values) {
      if (!(x >= 0.0)) throw InputError("config field 'b' must be nonnegative");
    }

    if (doc.contains("solver")) cfg.solver = doc.at("solver").get<std::string>();
    if (cfg.solver != "fixed_point" && cfg.solver != "minimize") {
      throw InputError("config field 'solver' must be fixed_point or minimize");
    }
    if (doc.contains("damping")) cfg.damping = number(doc.at("damping"), "damping");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw InputError("config field 'damping' must lie in (0, 1]");
    if (doc.contains("tol")) {
      cfg.tol = number(doc.at("tol"), "tol");
      if (!(*cfg.tol > 0.0)) throw InputError("config field 'tol' must be positive");
    }
    if (doc.contains("max_iter")) cfg.max_iter = count(doc.at("max_iter"), "max_iter");
    if (doc.contains("restarts")) cfg.restarts = std::max<std::size_t>(1, count(doc.at("restarts"), "restarts"));
    if (doc.contains("concentrated_starts")) {
      cfg.concentrated_starts = count(doc.at("concentrated_starts"), "concentrated_starts");
    }
    if (doc.contains("seed")) cfg.seed = count(doc.at("seed"), "seed");
    if (doc.contains("perturbation")) cfg.perturbation = number(doc.at("perturbation"), "perturbation");
    if (!(cfg.perturbation >= 0.0 && cfg.perturbation < 1.0)) {
      throw InputError("config field 'perturbation' must lie in [0, 1)");
    }
    if (doc.contains("eps")) cfg.eps = number(doc.at("eps"), "eps");
    if (!(cfg.eps >= 0.0)) throw InputError("config field 'eps' must be nonnegative");

    if (doc.contains("init")) {
      const auto& init = doc.at("init");
      if (init.is_string()) {
        cfg.init = init.get<std::string>();
        if (cfg.init != "random" && cfg.init != "uniform" && cfg.init != "cos2") {
          throw InputError("config field 'init' must be random, uniform, cos2 or {\"values\": [...]}");
        }
        if (cfg.init == "cos2") {
          for (bool c : cfg.is_circle) {
            if (!c) throw InputError("config field 'init': cos2 needs circle spaces");
          }
        }
      } else if (init.is_object() && init.contains("values")) {
        if (cfg.product) throw InputError("config field 'init': explicit values are not supported on products");
        cfg.init = "explicit";
        cfg.init_values = number_list(init.at("values"), "init.values");
        if (cfg.init_values.size() != cfg.components[0].size()) {
          throw InputError("config field 'init.values' must have one value per point");
        }
      } else {
        throw InputError("config field 'init' is malformed");
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

CorpusConfig load_corpus_config(const std::string& path, std::size_t default_n, TriangleCheck check) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("config '" + path + "' is not valid JSON: " + e.what());
  }
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_corpus_config(doc, parent.empty() ? "." : parent.string(), default_n, check);
}

}  // namespace onsager::cli
