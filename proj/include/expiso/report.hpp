#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

namespace expiso {

// Three-valued verdicts: a grid check whose margin lies inside its own error
// band must not claim a pass (or a fail) that the resolution cannot support.
enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

struct Witness {
  nlohmann::json parameters;
  double margin = 0.0;
};

struct VerificationReport {
  std::string check_name;
  nlohmann::json parameters = nlohmann::json::object();
  double margin = 0.0;     // inequality slack, positive = satisfied
  double tolerance = 0.0;
  Verdict verdict = Verdict::inconclusive;
  bool passed = false;     // margin >= -tolerance
  std::vector<Witness> witnesses;  // ascending margin

  /// Two-valued closing step for analytic checks (no error band to straddle).
  void finalize_analytic() {
    passed = margin >= -tolerance;
    verdict = passed ? Verdict::pass : Verdict::fail;
  }

  void sort_witnesses(std::size_t keep = 5) {
    std::stable_sort(witnesses.begin(), witnesses.end(),
                     [](const Witness& a, const Witness& b) { return a.margin < b.margin; });
    if (witnesses.size() > keep) witnesses.resize(keep);
  }
};

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& wit : r.witnesses) {
    w.push_back({{"parameters", wit.parameters}, {"margin", wit.margin}});
  }
  return nlohmann::json{{"check_name", r.check_name}, {"parameters", r.parameters},
                        {"margin", r.margin},         {"tolerance", r.tolerance},
                        {"verdict", to_string(r.verdict)}, {"passed", r.passed},
                        {"witnesses", w}};
}

inline nlohmann::json to_json(const std::vector<VerificationReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

}  // namespace expiso
