#include "monolab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace monolab {

std::string to_json(const GridFunctionND& f) {
  nlohmann::json j;
  j["version"] = "gfv1";
  j["d"] = f.d;
  j["n"] = f.n;
  j["values"] = f.values;
  return j.dump();
}

GridFunctionND gridnd_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.contains("version") || j.at("version").get<std::string>() != "gfv1") {
    throw std::invalid_argument("grid function json must carry version gfv1");
  }
  const auto d = j.at("d").get<std::size_t>();
  const auto n = j.at("n").get<std::size_t>();
  auto values = j.at("values").get<std::vector<double>>();
  return make_gridnd(d, n, std::move(values));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string format_double(double x) {
  // %.17g always round-trips; try shorter forms first for readable output
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x) return buf;
  }
  return buf;
}

}  // namespace monolab
