#include "martsim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace martsim {

namespace {

std::string fmt17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string field(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

std::string render(const ReportRow& r) {
  std::ostringstream os;
  os << r.check << ',' << r.model << ',' << field(r.q) << ','
     << (r.n ? std::to_string(*r.n) : std::string()) << ',' << field(r.empirical) << ','
     << field(r.se) << ',' << field(r.theoretical) << ',' << field(r.ratio) << ',' << r.verdict << ','
     << r.seed;
  return os.str();
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

ReportRow make_row(std::string check, std::string model, std::optional<double> q,
                   std::optional<int64_t> n, std::optional<double> empirical, std::optional<double> se,
                   std::optional<double> theoretical, std::string verdict, uint64_t seed) {
  ReportRow r;
  r.check = std::move(check);
  r.model = std::move(model);
  r.q = q;
  r.n = n;
  r.empirical = empirical;
  r.se = se;
  r.theoretical = theoretical;
  if (empirical && theoretical && *theoretical != 0.0) r.ratio = *empirical / *theoretical;
  r.verdict = std::move(verdict);
  r.seed = seed;
  return r;
}

void write_report(const std::filesystem::path& file, std::vector<ReportRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.check != b.check) return a.check < b.check;
    if (a.model != b.model) return a.model < b.model;
    const int64_t an = a.n.value_or(-1), bn = b.n.value_or(-1);
    if (an != bn) return an < bn;
    const double aq = a.q.value_or(-1.0), bq = b.q.value_or(-1.0);
    if (aq != bq) return aq < bq;
    return render(a) < render(b);
  });
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot open report file for writing: " + file.string());
  os << kReportHeader << '\n';
  for (const auto& r : rows) os << render(r) << '\n';
}

std::vector<ReportRow> read_report(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open report file: " + file.string());
  std::string line;
  if (!std::getline(is, line) || line != kReportHeader)
    throw std::runtime_error("bad report header in " + file.string());
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string item;
    std::stringstream ss(line);
    while (std::getline(ss, item, ',')) fields.push_back(item);
    while (fields.size() < 10) fields.emplace_back();
    ReportRow r;
    r.check = fields[0];
    r.model = fields[1];
    r.q = parse_opt(fields[2]);
    if (!fields[3].empty()) r.n = std::stoll(fields[3]);
    r.empirical = parse_opt(fields[4]);
    r.se = parse_opt(fields[5]);
    r.theoretical = parse_opt(fields[6]);
    r.ratio = parse_opt(fields[7]);
    r.verdict = fields[8];
    r.seed = fields[9].empty() ? 0 : std::stoull(fields[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

ReportSummary summarize(const std::vector<ReportRow>& rows) {
  ReportSummary s;
  for (const auto& r : rows) {
    if (r.verdict == "pass") {
      ++s.pass;
    } else if (r.verdict == "fail") {
      ++s.fail;
    } else {
      ++s.skipped;
    }
  }
  return s;
}

int report_summary_command(const std::filesystem::path& dir, std::ostream& os) {
  if (!std::filesystem::is_directory(dir)) {
    os << "report: not a directory: " << dir.string() << '\n';
    return 2;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ReportRow> all;
  std::map<std::string, ReportSummary> by_check;
  for (const auto& f : files) {
    std::vector<ReportRow> rows;
    try {
      rows = read_report(f);
    } catch (const std::exception&) {
      continue;  // profile or decomposition exports use their own headers
    }
    for (auto& r : rows) {
      by_check[r.check].pass += r.verdict == "pass";
      by_check[r.check].fail += r.verdict == "fail";
      by_check[r.check].skipped += r.verdict != "pass" && r.verdict != "fail";
      all.push_back(std::move(r));
    }
  }
  if (all.empty()) {
    os << "report: no verification rows found under " << dir.string() << '\n';
    return 2;
  }

  os << "check                     pass  fail  skip\n";
  for (const auto& [check, s] : by_check) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-24s %5lld %5lld %5lld\n", check.c_str(),
                  static_cast<long long>(s.pass), static_cast<long long>(s.fail),
                  static_cast<long long>(s.skipped));
    os << buf;
  }

  // summability / contraction checklist per model
  std::map<std::string, std::map<std::string, std::string>> checklist;
  for (const auto& r : all) {
    if (r.check.rfind("condition:", 0) == 0) {
      checklist[r.model][r.check.substr(10)] = r.verdict;
    }
  }
  if (!checklist.empty()) {
    os << "\ncondition checklist\n";
    for (const auto& [model, conds] : checklist) {
      os << "  " << model << '\n';
      for (const auto& [cond, verdict] : conds) os << "    " << cond << ": " << verdict << '\n';
    }
  }

  const ReportSummary total = summarize(all);
  os << "\ntotal: " << total.pass << " pass, " << total.fail << " fail, " << total.skipped
     << " skipped\n";
  if (total.fail > 0) {
    os << "failing rows:\n";
    for (const auto& r : all) {
      if (r.verdict == "fail") {
        os << "  " << r.check << " " << r.model;
        if (r.q) os << " q=" << *r.q;
        if (r.n) os << " n=" << *r.n;
        os << '\n';
      }
    }
    return 1;
  }
  return 0;
}

}  // namespace martsim
