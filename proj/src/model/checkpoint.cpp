#include "act/model/checkpoint.hpp"

#include <sstream>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act {

namespace {

constexpr const char* kMagic = "act-checkpoint v1";

std::vector<std::string> split_spaces(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::string format_checkpoint(const ActConfig& cfg, const Params& params) {
  std::string out = std::string(kMagic) + "\n";
  for (const auto& [k, v] : to_key_values(cfg)) out += "config " + k + "=" + v + "\n";
  for (const auto& name : params.names()) {
    const Tensor& t = params.at(name);
    out += "param " + name + " " + std::to_string(t.rank());
    for (std::size_t dim : t.shape()) out += " " + std::to_string(dim);
    out += "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i > 0) out += ' ';
      out += csv::format_double(t[i]);
    }
    out += "\n";
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw DataError(source + ": not an act checkpoint");
  std::map<std::string, std::string> kv;
  Checkpoint ck;
  std::size_t line_no = 1;
  auto fail = [&](const std::string& what) {
    throw DataError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("config ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("malformed config line");
      kv[line.substr(7, eq - 7)] = line.substr(eq + 1);
    } else if (line.rfind("param ", 0) == 0) {
      const auto head = split_spaces(line);
      if (head.size() < 3) fail("malformed param header");
      const std::size_t rank = parse_size("rank", head[2]);
      if (head.size() != 3 + rank) fail("param header rank mismatch");
      Shape shape;
      for (std::size_t r = 0; r < rank; ++r) shape.push_back(parse_size("dim", head[3 + r]));
      std::string body;
      if (!std::getline(in, body)) fail("missing values for " + head[1]);
      ++line_no;
      const auto toks = split_spaces(body);
      if (toks.size() != shape_size(shape)) fail("value count mismatch for " + head[1]);
      std::vector<double> values;
      values.reserve(toks.size());
      for (const auto& tok : toks) values.push_back(csv::parse_double(tok, source));
      ck.params.add(head[1], Tensor(shape, std::move(values)));
    } else {
      fail("unrecognised line");
    }
  }
  apply_key_values(ck.config, kv);
  if (!kv.empty()) throw DataError(source + ": unknown config key '" + kv.begin()->first + "'");
  ck.config.validate();
  for (const auto& spec : param_layout(ck.config)) {
    if (!ck.params.contains(spec.name)) throw DataError(source + ": missing parameter " + spec.name);
    if (ck.params.at(spec.name).shape() != spec.shape) throw DataError(source + ": bad shape for " + spec.name);
  }
  if (ck.params.names().size() != param_layout(ck.config).size()) {
    throw DataError(source + ": unexpected extra parameters");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ActConfig& cfg, const Params& params) {
  csv::write_text(path, format_checkpoint(cfg, params));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(csv::read_text(path), path.string());
}

}  // namespace act
