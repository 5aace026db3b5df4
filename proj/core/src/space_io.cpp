#include "onsager/space_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace onsager {

namespace {

std::vector<std::string> tokenize(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

double parse_number(const std::string& tok) {
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw InputError("space file: expected a number, got '" + tok + "'");
  return v;
}

bool is_keyword(const std::string& tok) {
  return tok == "points" || tok == "labels" || tok == "distances" || tok == "weights";
}

}  // namespace

DiscreteCorpusSpace read_space(std::istream& in, TriangleCheck check) {
  const std::vector<std::string> tokens = tokenize(in);
  std::size_t pos = 0;
  auto expect_more = [&](const char* what) {
    if (pos >= tokens.size()) throw InputError(std::string("space file: unexpected end while reading ") + what);
  };

  expect_more("point count");
  if (tokens[pos] != "points") throw InputError("space file: must start with 'points <m>'");
  ++pos;
  expect_more("point count");
  const double mval = parse_number(tokens[pos++]);
  if (mval < 1 || mval != static_cast<double>(static_cast<std::size_t>(mval))) {
    throw InputError("space file: point count must be a positive integer");
  }
  const auto m = static_cast<std::size_t>(mval);

  std::vector<std::string> labels;
  std::vector<double> dist;
  std::vector<double> weights;
  bool have_dist = false;

  while (pos < tokens.size()) {
    const std::string key = tokens[pos++];
    if (key == "labels") {
      for (std::size_t i = 0; i < m; ++i) {
        expect_more("labels");
        labels.push_back(tokens[pos++]);
      }
    } else if (key == "distances") {
      dist.reserve(m * m);
      for (std::size_t i = 0; i < m * m; ++i) {
        expect_more("distance matrix");
        if (is_keyword(tokens[pos])) throw InputError("space file: distance matrix has fewer than m*m entries");
        dist.push_back(parse_number(tokens[pos++]));
      }
      have_dist = true;
    } else if (key == "weights") {
      if (pos < tokens.size() && tokens[pos] == "uniform") {
        ++pos;
        weights.assign(m, 1.0 / static_cast<double>(m));
      } else {
        for (std::size_t i = 0; i < m; ++i) {
          expect_more("weights");
          weights.push_back(parse_number(tokens[pos++]));
        }
      }
    } else {
      throw InputError("space file: unexpected token '" + key + "'");
    }
  }
  if (!have_dist) throw InputError("space file: missing 'distances' section");
  if (weights.empty()) weights.assign(m, 1.0 / static_cast<double>(m));
  return DiscreteCorpusSpace(std::move(dist), std::move(weights), std::move(labels), check);
}

DiscreteCorpusSpace load_space(const std::string& path, TriangleCheck check) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open space file '" + path + "'");
  return read_space(in, check);
}

void write_space(std::ostream& out, const DiscreteCorpusSpace& space) {
  const std::size_t m = space.size();
  out << "points " << m << '\n';
  if (!space.labels().empty()) {
    out << "labels";
    for (const auto& l : space.labels()) out << ' ' << l;
    out << '\n';
  }
  out << std::setprecision(17) << "distances\n";
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out << (j ? " " : "") << space.distance(i, j);
    out << '\n';
  }
  out << "weights\n";
  for (std::size_t i = 0; i < m; ++i) out << (i ? " " : "") << space.weights()[i];
  out << '\n';
}

}  // namespace onsager
