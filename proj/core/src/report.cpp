#include "sojourn/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sojourn {
namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json to_json(const TailEstimate& e) {
  return json{{"u", e.u},
              {"x", e.x},
              {"c", e.c},
              {"T", e.horizon},
              {"v", e.v},
              {"p_hat", e.p_hat},
              {"stderr", e.se},
              {"ci_lo", e.ci_lo},
              {"ci_hi", e.ci_hi},
              {"reps", e.replicates},
              {"hits", e.hits},
              {"seed", e.seed},
              {"censored_fraction", e.censored_fraction},
              {"grid", json{{"horizon", e.grid.horizon}, {"steps", e.grid.steps}}}};
}

TailEstimate tail_from_json(const json& j) {
  TailEstimate e;
  e.u = j.at("u").get<double>();
  e.x = j.at("x").get<double>();
  e.c = j.at("c").get<double>();
  e.horizon = j.at("T").get<double>();
  e.v = j.at("v").get<double>();
  e.p_hat = j.at("p_hat").get<double>();
  e.se = j.at("stderr").get<double>();
  e.ci_lo = j.at("ci_lo").get<double>();
  e.ci_hi = j.at("ci_hi").get<double>();
  e.replicates = j.at("reps").get<std::uint64_t>();
  e.hits = j.at("hits").get<std::uint64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.censored_fraction = j.at("censored_fraction").get<double>();
  e.grid.horizon = j.at("grid").at("horizon").get<double>();
  e.grid.steps = j.at("grid").at("steps").get<std::size_t>();
  return e;
}

json to_json(const AsymptoticResult& r) {
  json inputs = json::array();
  for (const auto& in : r.berman_inputs)
    inputs.push_back({{"key", in.key}, {"value", in.value}, {"provenance", in.provenance}});
  return json{{"value", r.value},          {"constant", r.constant_factor},
              {"algebraic", r.algebraic_factor}, {"gauss_tail", r.gauss_tail_factor},
              {"regime", r.regime},        {"berman_inputs", inputs}};
}

json to_json(const ConvergenceRow& row) {
  return json{{"u", row.u},
              {"mc", to_json(row.mc)},
              {"asymptotic", to_json(row.asymptotic)},
              {"ratio", row.ratio}};
}

json to_json(const BermanEstimate& e) {
  json ladder = json::array();
  for (const auto& p : e.ladder)
    ladder.push_back({{"S", p.s}, {"estimate", p.estimate}, {"stderr", p.se}});
  return json{{"constant_key", e.constant_key},
              {"record_id", e.record_id},
              {"point", e.point},
              {"stderr", e.se},
              {"reps", e.replicates},
              {"normalization",
               e.normalization == BermanNormalization::divide_by_s ? "divide-by-S" : "none"},
              {"trimmed_mean", e.trimmed_mean},
              {"warning", e.warning},
              {"ladder", ladder}};
}

template <class T>
std::string records_json(std::span<const T> records) {
  json doc;
  doc["schema"] = kSchemaVersion;
  doc["records"] = json::array();
  for (const auto& r : records) doc["records"].push_back(to_json(r));
  return doc.dump(2);
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report: cannot open '" + path + "' for writing");
  out << text;
  if (!out.good()) throw std::runtime_error("write_report: write to '" + path + "' failed");
}

}  // namespace

std::string to_json_string(std::span<const TailEstimate> records) {
  return records_json(records);
}
std::string to_json_string(std::span<const ConvergenceRow> records) {
  return records_json(records);
}
std::string to_json_string(std::span<const BermanEstimate> records) {
  return records_json(records);
}

std::string to_json_string(const PassageLawEstimate& record) {
  json doc;
  doc["schema"] = kSchemaVersion;
  doc["regime"] = record.regime;
  doc["reps"] = record.replicates;
  doc["accepted"] = record.accepted;
  doc["atom_hits"] = record.atom_hits;
  doc["acceptance_rate"] = record.acceptance_rate;
  doc["atom_mass"] = record.atom_mass;
  doc["normalized"] = record.normalized;
  return doc.dump(2);
}

std::string to_json_string(const AsymptoticResult& record) {
  json doc = to_json(record);
  doc["schema"] = kSchemaVersion;
  return doc.dump(2);
}

std::string to_csv_string(std::span<const TailEstimate> records) {
  std::ostringstream out;
  out << "u,x,c,T,p_hat,stderr,ci_lo,ci_hi,reps,seed,censored_fraction\n";
  for (const auto& e : records)
    out << g17(e.u) << ',' << g17(e.x) << ',' << g17(e.c) << ',' << g17(e.horizon) << ','
        << g17(e.p_hat) << ',' << g17(e.se) << ',' << g17(e.ci_lo) << ',' << g17(e.ci_hi) << ','
        << e.replicates << ',' << e.seed << ',' << g17(e.censored_fraction) << '\n';
  return out.str();
}

std::string to_csv_string(std::span<const ConvergenceRow> records) {
  std::ostringstream out;
  out << "u,p_hat,stderr,asymptotic,ratio,regime\n";
  for (const auto& r : records)
    out << g17(r.u) << ',' << g17(r.mc.p_hat) << ',' << g17(r.mc.se) << ','
        << g17(r.asymptotic.value) << ',' << g17(r.ratio) << ',' << r.asymptotic.regime << '\n';
  return out.str();
}

std::string to_csv_string(std::span<const BermanEstimate> records) {
  std::ostringstream out;
  out << "constant_key,S,estimate,stderr,reps,normalization,warning\n";
  for (const auto& e : records) {
    const char* norm =
        e.normalization == BermanNormalization::divide_by_s ? "divide-by-S" : "none";
    for (const auto& p : e.ladder)
      out << e.constant_key << ',' << g17(p.s) << ',' << g17(p.estimate) << ',' << g17(p.se)
          << ',' << e.replicates << ',' << norm << ',' << (e.warning ? 1 : 0) << '\n';
    out << e.constant_key << ",point," << g17(e.point) << ',' << g17(e.se) << ',' << e.replicates
        << ',' << norm << ',' << (e.warning ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<TailEstimate> parse_tail_estimates(const std::string& json_text) {
  const json doc = json::parse(json_text);
  std::vector<TailEstimate> out;
  for (const auto& j : doc.at("records")) out.push_back(tail_from_json(j));
  return out;
}

BermanValues parse_berman_values(const std::string& json_text) {
  const json doc = json::parse(json_text);
  BermanValues out;
  for (const auto& j : doc.at("records")) {
    ConstantValue v;
    v.value = j.at("point").get<double>();
    v.se = j.value("stderr", 0.0);
    v.provenance = "estimated";
    out[j.at("constant_key").get<std::string>()] = v;
  }
  return out;
}

void write_report(std::span<const TailEstimate> records, const std::string& path,
                  ReportFormat format) {
  write_text(format == ReportFormat::csv ? to_csv_string(records) : to_json_string(records), path);
}
void write_report(std::span<const ConvergenceRow> records, const std::string& path,
                  ReportFormat format) {
  write_text(format == ReportFormat::csv ? to_csv_string(records) : to_json_string(records), path);
}
void write_report(std::span<const BermanEstimate> records, const std::string& path,
                  ReportFormat format) {
  write_text(format == ReportFormat::csv ? to_csv_string(records) : to_json_string(records), path);
}

}  // namespace sojourn
