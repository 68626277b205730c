#pragma once

// Rows of a check report and their CSV / JSON serialization.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace sigmalab {

enum class Verdict { pass, fail, finding, info };
const char* to_string(Verdict v);

struct ReportRow {
  std::string id;
  std::string anchor;
  double value = 0.0;
  double reference = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::info;
  std::string note;
};

/// pass iff residual is finite and <= tolerance.
ReportRow check_row(std::string id, std::string anchor, double value, double reference, double residual,
                    double tolerance, std::string note = {});
ReportRow info_row(std::string id, std::string anchor, double value, double reference = 0.0, std::string note = {});
/// finding when residual > tolerance, pass otherwise.
ReportRow finding_row(std::string id, std::string anchor, double value, double reference, double residual,
                      double tolerance, std::string note = {});

/// %.17g, with "nan", "inf" and "-inf" spelled out.
std::string format_double(double v);
/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::string header;  ///< extra "key=value; ..." text for the first CSV line
  std::vector<ReportRow> rows;

  void add(ReportRow r) { rows.push_back(std::move(r)); }
  int count(Verdict v) const;
  /// 2 on any fail row, or on findings when strict; 0 otherwise.
  int exit_code(bool strict_paper) const;
  std::string csv() const;
  nlohmann::json summary(bool strict_paper) const;
};

}  // namespace sigmalab
