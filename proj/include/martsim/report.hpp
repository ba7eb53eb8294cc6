#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace martsim {

// One verification row. Absent values render as empty CSV fields; floats use
// 17 significant digits so reports are bit-stable across refactors.
struct ReportRow {
  std::string check;
  std::string model;
  std::optional<double> q;
  std::optional<int64_t> n;
  std::optional<double> empirical;
  std::optional<double> se;
  std::optional<double> theoretical;
  std::optional<double> ratio;  // present whenever both sides exist
  std::string verdict;          // pass | fail | skipped:<reason>
  uint64_t seed = 0;
};

inline constexpr const char* kReportHeader = "check,model,q,n,empirical,se,theoretical,ratio,verdict,seed";

ReportRow make_row(std::string check, std::string model, std::optional<double> q,
                   std::optional<int64_t> n, std::optional<double> empirical, std::optional<double> se,
                   std::optional<double> theoretical, std::string verdict, uint64_t seed);

// Sorts rows by (check, model, n, q, rendered line) and writes the fixed
// header; output bytes are a pure function of the rows.
void write_report(const std::filesystem::path& file, std::vector<ReportRow> rows);
std::vector<ReportRow> read_report(const std::filesystem::path& file);

struct ReportSummary {
  int64_t pass = 0;
  int64_t fail = 0;
  int64_t skipped = 0;
};
ReportSummary summarize(const std::vector<ReportRow>& rows);

// Aggregates every *.csv report in the directory, prints a per-check table
// and the per-model condition checklist. Returns 0 iff no fail rows.
int report_summary_command(const std::filesystem::path& dir, std::ostream& os);

}  // namespace martsim
