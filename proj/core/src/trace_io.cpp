#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "decaylab/errors.hpp"
#include "decaylab/wave.hpp"

namespace decaylab::wave {

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  out += buf;
}

}  // namespace

std::string trace_csv(const EnergyTrace& trace) {
  std::string out = "t,E,E1,dissipation\n";
  out.reserve(out.size() + trace.samples.size() * 80);
  for (const auto& s : trace.samples) {
    append_number(out, s.t);
    out += ',';
    append_number(out, s.E);
    out += ',';
    append_number(out, s.E1);
    out += ',';
    append_number(out, s.dissipation);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const EnergyTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << trace_csv(trace);
  if (!out) throw std::runtime_error("failed writing " + path);
}

EnergyTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,E,E1,dissipation") {
    throw ConfigError(path + ": expected header 't,E,E1,dissipation', got '" + line + "'");
  }
  EnergyTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    double values[4];
    std::istringstream row(line);
    std::string cell;
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(row, cell, ',')) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 4 columns");
      }
      try {
        values[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    trace.samples.push_back({values[0], values[1], values[2], values[3]});
  }
  return trace;
}

}  // namespace decaylab::wave
