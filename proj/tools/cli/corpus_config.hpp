#pragma once

// JSON configuration for the corpus and concentrate subcommands.
//
//   {
//     "space":  {"type": "circle", "n": 64}
//             | {"type": "file", "path": "space.txt"}
//             | {"type": "inline", "distances": [[...], ...], "weights": [...], "labels": [...]}
//             | {"type": "product", "components": [<space>, ...]},
//     "kernel": {"name": "maier_saupe", "parameter": 1.0, "shift": 0.0},
//     "kernels": [<kernel>, ...],            // product spaces: one per component
//     "b": 8 | [4, 8, 16] | "4:16:5",
//     "solver": "fixed_point" | "minimize",
//     "damping": 0.5, "tol": 1e-10, "max_iter": 200000, "restarts": 1,
//     "concentrated_starts": 0,
//     "seed": 1, "perturbation": 0.01,
//     "init": "random" | "uniform" | "cos2" | {"values": [...]},
//     "eps": 1e-6
//   }

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "onsager/core.hpp"

namespace onsager::cli {

struct CorpusConfig {
  std::vector<DiscreteCorpusSpace> components;  // one entry unless product
  std::vector<bool> is_circle;
  bool product = false;
  std::vector<KernelSpec> kernels;  // parallel to components
  std::vector<double> b_values;
  std::string solver = "fixed_point";
  double damping = 0.5;
  std::optional<double> tol;
  std::size_t max_iter = 200000;
  std::size_t restarts = 1;
  std::size_t concentrated_starts = 0;
  std::uint64_t seed = 1;
  double perturbation = 0.01;
  std::string init = "random";
  std::vector<double> init_values;
  double eps = 1e-6;
  double mesh = 0.0;  // smallest positive distance of the (first) space
};

/// Parses sweep syntax "min:max:steps" (inclusive, evenly spaced), a single
/// decimal number, or a comma separated list of numbers and ranges.
std::vector<double> parse_values(const std::string& text);

/// `base_dir` resolves relative "file" paths. `default_n` sizes circles
/// without an explicit "n". Throws InputError naming the failing field.
/// `check` governs the triangle-inequality pass on file and inline spaces.
CorpusConfig parse_corpus_config(const nlohmann::json& doc, const std::string& base_dir, std::size_t default_n,
                                 TriangleCheck check = TriangleCheck::automatic);
CorpusConfig load_corpus_config(const std::string& path, std::size_t default_n,
                                TriangleCheck check = TriangleCheck::automatic);

}  // namespace onsager::cli
