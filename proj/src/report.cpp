#include "sigmalab/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace sigmalab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::finding: return "finding";
    case Verdict::info: return "info";
  }
  return "?";
}

ReportRow check_row(std::string id, std::string anchor, double value, double reference, double residual,
                    double tolerance, std::string note) {
  ReportRow r{std::move(id), std::move(anchor), value, reference, residual, tolerance, Verdict::fail, std::move(note)};
  if (std::isfinite(residual) && residual <= tolerance) r.verdict = Verdict::pass;
  return r;
}

ReportRow info_row(std::string id, std::string anchor, double value, double reference, std::string note) {
  return ReportRow{std::move(id), std::move(anchor), value, reference, 0.0, 0.0, Verdict::info, std::move(note)};
}

ReportRow finding_row(std::string id, std::string anchor, double value, double reference, double residual,
                      double tolerance, std::string note) {
  ReportRow r = check_row(std::move(id), std::move(anchor), value, reference, residual, tolerance, std::move(note));
  if (r.verdict == Verdict::fail) r.verdict = Verdict::finding;
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

int Report::count(Verdict v) const {
  int c = 0;
  for (const auto& r : rows) c += r.verdict == v;
  return c;
}

int Report::exit_code(bool strict_paper) const {
  if (count(Verdict::fail) > 0) return 2;
  if (strict_paper && count(Verdict::finding) > 0) return 2;
  return 0;
}

std::string Report::csv() const {
  std::ostringstream os;
  os << "# command=" << command << "; seed=" << seed;
  if (!header.empty()) os << "; " << header;
  os << "\n";
  os << "id,anchor,value,reference,residual,tolerance,verdict,note\n";
  for (const auto& r : rows) {
    os << csv_field(r.id) << ',' << csv_field(r.anchor) << ',' << format_double(r.value) << ','
       << format_double(r.reference) << ',' << format_double(r.residual) << ',' << format_double(r.tolerance) << ','
       << to_string(r.verdict) << ',' << csv_field(r.note) << '\n';
  }
  return os.str();
}

nlohmann::json Report::summary(bool strict_paper) const {
  using nlohmann::json;
  auto row_json = [](const ReportRow& r) {
    return json{{"id", r.id},
                {"anchor", r.anchor},
                {"value", format_double(r.value)},
                {"reference", format_double(r.reference)},
                {"residual", format_double(r.residual)},
                {"tolerance", format_double(r.tolerance)},
                {"note", r.note}};
  };
  json failures = json::array();
  json findings = json::array();
  for (const auto& r : rows) {
    if (r.verdict == Verdict::fail) failures.push_back(row_json(r));
    if (r.verdict == Verdict::finding) findings.push_back(row_json(r));
  }
  return json{{"command", command},
              {"seed", seed},
              {"strict_paper", strict_paper},
              {"counts",
               {{"rows", rows.size()},
                {"pass", count(Verdict::pass)},
                {"fail", count(Verdict::fail)},
                {"finding", count(Verdict::finding)},
                {"info", count(Verdict::info)}}},
              {"failures", failures},
              {"findings", findings},
              {"exit_code", exit_code(strict_paper)}};
}

}  // namespace sigmalab
