#include "rfdelyap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace rfdelyap {

namespace {

void put_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "\"nan\"";
  } else if (std::isinf(v)) {
    out += v > 0 ? "\"inf\"" : "\"-inf\"";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  }
}

void put(std::string& out, const nlohmann::json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted
        if (!first) out += ",\n";
        first = false;
        out += pad;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        put(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Flat numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        put(out, e, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      put_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j) {
  std::string out;
  put(out, j, 0);
  out += "\n";
  return out;
}

std::string summary_text(const CertReport& report, const std::string& scenario_path,
                         const std::string& out_dir) {
  std::string s;
  char buf[256];
  s += "report: " + report.title + "\n";
  s += std::string("result: ") + (report.passed() ? "PASS" : "FAIL") +
       " (pass means no violation was found on the sampled coverage)\n";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const CheckResult& c = report.checks[i];
    std::snprintf(buf, sizeof buf, "[%s] %s  worst %.6g  tol %.3g  n=%zu\n", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.worst_slack, c.tolerance, c.samples);
    s += buf;
    if (!c.passed && !c.witness.is_null())
      s += "    replay: rfde-lyap replay " + scenario_path + " " + out_dir + "/witness_" +
           std::to_string(i) + ".json\n";
  }
  for (const auto& w : report.warnings) s += "warning: " + w + "\n";
  if (report.checks.empty()) s += "(no checks)\n";
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace rfdelyap
