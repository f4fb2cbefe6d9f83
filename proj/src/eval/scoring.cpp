#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "brx/errors.hpp"
#include "brx/eval.hpp"

namespace brx::eval {

using repr::BrKind;

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Strategy: return "strategy";
    case Metric::Category: return "category";
    case Metric::Goal: return "goal";
    case Metric::Action: return "action";
    case Metric::Intent: return "intent";
  }
  return "?";
}

std::string_view display_name(Metric m) {
  switch (m) {
    case Metric::Strategy: return "Strategy";
    case Metric::Category: return "Category";
    case Metric::Goal: return "Goal";
    case Metric::Action: return "Action";
    case Metric::Intent: return "Intent";
  }
  return "?";
}

std::optional<bool> AnnotationLabels::metric(Metric m) const {
  switch (m) {
    case Metric::Strategy: return strategy;
    case Metric::Category: return category;
    case Metric::Goal: return goal;
    case Metric::Action: return action;
    case Metric::Intent: return intent;
  }
  return std::nullopt;
}

std::vector<Metric> metrics_for(Behavior b) {
  if (b == Behavior::Fixed) return {Metric::Strategy, Metric::Action, Metric::Intent};
  return {kAllMetrics.begin(), kAllMetrics.end()};
}

namespace {

// nullopt sorts before every category.
int category_rank(const std::optional<StateCategory>& c) { return c ? static_cast<int>(*c) + 1 : 0; }

using CellKey = std::tuple<int, int, int, int>;

CellKey key_of(Behavior b, BrKind k, const std::optional<StateCategory>& c, Metric m) {
  return {static_cast<int>(b), static_cast<int>(k), category_rank(c), static_cast<int>(m)};
}

// Category under which a record is tabulated; false when it fits no table.
bool table_category(const LabeledRecord& r, std::optional<StateCategory>& out) {
  if (r.behavior == Behavior::Fixed) {
    out.reset();
    return true;
  }
  out = r.category;
  return r.category.has_value();
}

}  // namespace

std::vector<EvalCell> score_cells(const std::vector<LabeledRecord>& records) {
  std::map<CellKey, EvalCell> cells;
  for (const auto& r : records) {
    std::optional<StateCategory> cat;
    if (!table_category(r, cat)) continue;
    for (Metric m : metrics_for(r.behavior)) {
      const auto v = r.labels.metric(m);
      if (!v) continue;
      auto [it, inserted] = cells.try_emplace(key_of(r.behavior, r.br_kind, cat, m));
      if (inserted) it->second = EvalCell{r.behavior, r.br_kind, cat, m, 0, 0};
      it->second.denominator += 1;
      it->second.numerator += *v ? 1 : 0;
    }
  }
  std::vector<EvalCell> out;
  out.reserve(cells.size());
  for (auto& [k, c] : cells) out.push_back(c);
  return out;
}

std::vector<HallucinationRate> hallucination_rates(const std::vector<LabeledRecord>& records) {
  std::map<std::pair<int, int>, HallucinationRate> rates;
  for (const auto& r : records) {
    const auto& l = r.labels;
    if (!l.hallucination_in_explanation && !l.hallucination_in_prediction) continue;
    auto [it, inserted] = rates.try_emplace({static_cast<int>(r.behavior), static_cast<int>(r.br_kind)});
    auto& h = it->second;
    if (inserted) {
      h.behavior = r.behavior;
      h.br_kind = r.br_kind;
    }
    if (l.hallucination_in_explanation) {
      h.explanation_labeled += 1;
      h.explanation_flags += *l.hallucination_in_explanation ? 1 : 0;
    }
    if (l.hallucination_in_prediction) {
      h.prediction_labeled += 1;
      h.prediction_flags += *l.hallucination_in_prediction ? 1 : 0;
    }
  }
  std::vector<HallucinationRate> out;
  for (auto& [k, h] : rates) out.push_back(h);
  return out;
}

namespace {

std::string behavior_label(Behavior b) {
  std::string s(policy::to_string(b));
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string fmt_ratio(int num, int den) {
  if (den == 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(num) / den);
  return buf;
}

const EvalCell* find_cell(const std::vector<EvalCell>& cells, Behavior b, BrKind k,
                          const std::optional<StateCategory>& c, Metric m) {
  for (const auto& cell : cells) {
    if (cell.behavior == b && cell.br_kind == k && cell.category == c && cell.metric == m) return &cell;
  }
  return nullptr;
}

std::string cell_text(const std::vector<EvalCell>& cells, Behavior b, BrKind k,
                      const std::optional<StateCategory>& c, Metric m) {
  const EvalCell* cell = find_cell(cells, b, k, c, m);
  return cell ? fmt_ratio(cell->numerator, cell->denominator) : "-";
}

struct Row {
  std::vector<std::string> cells;
  bool header = false;
};

// Two-space column gap; header rows left-aligned, data rows left-align the
// first two columns and right-align the rest. Trailing blanks are trimmed.
std::string render_rows(const std::string& title, const std::vector<Row>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.cells.size()) width.resize(r.cells.size(), 0);
    for (std::size_t i = 0; i < r.cells.size(); ++i) width[i] = std::max(width[i], r.cells[i].size());
  }
  std::string out = title + "\n";
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
      if (i) line += "  ";
      const std::string& s = r.cells[i];
      const std::string pad(width[i] - s.size(), ' ');
      line += (r.header || i < 2) ? s + pad : pad + s;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

constexpr std::array<Behavior, 2> kTableBehaviors = {Behavior::Exploit, Behavior::Explore};

std::string category_table(const std::string& title, const std::vector<EvalCell>& cells,
                           const std::vector<Metric>& metrics) {
  std::vector<Row> rows;
  Row groups{{"", ""}, true};
  Row names{{"Behavior", "Method"}, true};
  for (StateCategory c : kAllCategories) {
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      groups.cells.push_back(i == 0 ? std::string(display_name(c)) : "");
      names.cells.emplace_back(display_name(metrics[i]));
    }
  }
  rows.push_back(groups);
  rows.push_back(names);
  for (Behavior b : kTableBehaviors) {
    for (BrKind k : repr::kAllBrKinds) {
      Row r{{behavior_label(b), std::string(repr::display_name(k))}, false};
      for (StateCategory c : kAllCategories) {
        for (Metric m : metrics) r.cells.push_back(cell_text(cells, b, k, c, m));
      }
      rows.push_back(std::move(r));
    }
  }
  return render_rows(title, rows);
}

}  // namespace

std::string explanation_table(const std::vector<EvalCell>& cells) {
  return category_table("Explanation accuracy", cells, {Metric::Strategy, Metric::Category, Metric::Goal});
}

std::string prediction_table(const std::vector<EvalCell>& cells) {
  return category_table("Action prediction accuracy", cells, {Metric::Action, Metric::Intent});
}

std::string fixed_table(const std::vector<EvalCell>& cells) {
  std::vector<Row> rows;
  rows.push_back({{"", "", "Explanation", "Prediction", ""}, true});
  rows.push_back({{"Behavior", "Method", "Strategy", "Action", "Intent"}, true});
  for (BrKind k : repr::kAllBrKinds) {
    Row r{{behavior_label(Behavior::Fixed), std::string(repr::display_name(k))}, false};
    for (Metric m : {Metric::Strategy, Metric::Action, Metric::Intent}) {
      r.cells.push_back(cell_text(cells, Behavior::Fixed, k, std::nullopt, m));
    }
    rows.push_back(std::move(r));
  }
  return render_rows("Fixed behavior accuracy", rows);
}

std::string hallucination_table(const std::vector<HallucinationRate>& rates) {
  std::vector<Row> rows;
  rows.push_back({{"Behavior", "Method", "Explanation", "Prediction"}, true});
  for (Behavior b : {Behavior::Exploit, Behavior::Explore, Behavior::Fixed}) {
    for (BrKind k : repr::kAllBrKinds) {
      Row r{{behavior_label(b), std::string(repr::display_name(k))}, false};
      const HallucinationRate* h = nullptr;
      for (const auto& x : rates) {
        if (x.behavior == b && x.br_kind == k) h = &x;
      }
      r.cells.push_back(h ? fmt_ratio(h->explanation_flags, h->explanation_labeled) : "-");
      r.cells.push_back(h ? fmt_ratio(h->prediction_flags, h->prediction_labeled) : "-");
      rows.push_back(std::move(r));
    }
  }
  return render_rows("Hallucination rate", rows);
}

json cells_to_json(const std::vector<EvalCell>& cells) {
  json out = json::array();
  for (const auto& c : cells) {
    out.push_back({{"behavior", policy::to_string(c.behavior)},
                   {"br_kind", repr::to_string(c.br_kind)},
                   {"state_category", c.category ? json(to_string(*c.category)) : json(nullptr)},
                   {"metric", to_string(c.metric)},
                   {"numerator", c.numerator},
                   {"denominator", c.denominator},
                   {"accuracy", c.accuracy()}});
  }
  return out;
}

json rates_to_json(const std::vector<HallucinationRate>& rates) {
  auto rate = [](int num, int den) { return den ? json(static_cast<double>(num) / den) : json(nullptr); };
  json out = json::array();
  for (const auto& h : rates) {
    out.push_back({{"behavior", policy::to_string(h.behavior)},
                   {"br_kind", repr::to_string(h.br_kind)},
                   {"explanation_flags", h.explanation_flags},
                   {"explanation_labeled", h.explanation_labeled},
                   {"explanation_rate", rate(h.explanation_flags, h.explanation_labeled)},
                   {"prediction_flags", h.prediction_flags},
                   {"prediction_labeled", h.prediction_labeled},
                   {"prediction_rate", rate(h.prediction_flags, h.prediction_labeled)}});
  }
  return out;
}

CorrelationReport hallucination_correlation(const std::vector<LabeledRecord>& records) {
  struct Acc {
    int flags = 0, flagged = 0, action = 0, action_n = 0, intent = 0, intent_n = 0;
  };
  std::map<std::tuple<int, int, int>, Acc> per_cell;
  for (const auto& r : records) {
    if (r.behavior == Behavior::Fixed || !r.category) continue;
    auto& a = per_cell[{static_cast<int>(r.behavior), static_cast<int>(r.br_kind), static_cast<int>(*r.category)}];
    if (r.labels.hallucination_in_explanation) {
      a.flagged += 1;
      a.flags += *r.labels.hallucination_in_explanation ? 1 : 0;
    }
    if (r.labels.action) {
      a.action_n += 1;
      a.action += *r.labels.action ? 1 : 0;
    }
    if (r.labels.intent) {
      a.intent_n += 1;
      a.intent += *r.labels.intent ? 1 : 0;
    }
  }

  CorrelationReport rep;
  std::vector<double> hx, ay, hx2, iy;
  for (const auto& [k, a] : per_cell) {
    if (!a.flagged) continue;
    const double h = static_cast<double>(a.flags) / a.flagged;
    if (a.action_n) {
      hx.push_back(h);
      ay.push_back(static_cast<double>(a.action) / a.action_n);
    }
    if (a.intent_n) {
      hx2.push_back(h);
      iy.push_back(static_cast<double>(a.intent) / a.intent_n);
    }
  }
  rep.cells = static_cast<int>(std::max(hx.size(), hx2.size()));
  auto attempt = [](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<PearsonResult> {
    try {
      return pearson(x, y);
    } catch (const EvalError&) {
      return std::nullopt;
    }
  };
  rep.action = attempt(hx, ay);
  rep.intent = attempt(hx2, iy);
  return rep;
}

std::string correlation_text(const CorrelationReport& c) {
  auto line = [](const char* name, const std::optional<PearsonResult>& p) {
    if (!p) return std::string(name) + ": undefined\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: r = %.4f, p = %.4f, n = %d, %s\n", name, p->r, p->p, p->n,
                  p->significant() ? "significant at 0.05" : "not significant at 0.05");
    return std::string(buf);
  };
  return "Hallucination vs prediction accuracy (Pearson, per cell)\n" +
         line("explanation hallucination vs action", c.action) +
         line("explanation hallucination vs intent", c.intent);
}

json correlation_to_json(const CorrelationReport& c) {
  auto enc = [](const std::optional<PearsonResult>& p) -> json {
    if (!p) return nullptr;
    return {{"r", p->r}, {"t", p->t}, {"p", p->p}, {"n", p->n}, {"significant", p->significant()}};
  };
  return {{"cells", c.cells}, {"action", enc(c.action)}, {"intent", enc(c.intent)}};
}

void to_json(json& j, const AnnotationLabels& l) {
  auto opt = [](const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); };
  j = json{{"strategy", opt(l.strategy)},
           {"category", opt(l.category)},
           {"goal", opt(l.goal)},
           {"action", opt(l.action)},
           {"intent", opt(l.intent)},
           {"hallucination_in_explanation", opt(l.hallucination_in_explanation)},
           {"hallucination_in_prediction", opt(l.hallucination_in_prediction)},
           {"annotator_id", l.annotator_id}};
}

void from_json(const json& j, AnnotationLabels& l) {
  auto opt = [&](const char* key) -> std::optional<bool> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_boolean()) throw FormatError(std::string("label '") + key + "' must be a boolean");
    return j.at(key).get<bool>();
  };
  l.strategy = opt("strategy");
  l.category = opt("category");
  l.goal = opt("goal");
  l.action = opt("action");
  l.intent = opt("intent");
  l.hallucination_in_explanation = opt("hallucination_in_explanation");
  l.hallucination_in_prediction = opt("hallucination_in_prediction");
  l.annotator_id = j.value("annotator_id", "");
}

void to_json(json& j, const LabeledRecord& r) {
  to_json(j, r.labels);
  j["record_id"] = r.record_id;
  j["behavior"] = policy::to_string(r.behavior);
  j["br_kind"] = repr::to_string(r.br_kind);
  j["state_category"] = r.category ? json(to_string(*r.category)) : json(nullptr);
  j["role"] = env::to_string(r.role);
}

void from_json(const json& j, LabeledRecord& r) {
  if (!j.is_object()) throw FormatError("label line must be an object");
  try {
    from_json(j, r.labels);
    r.record_id = j.at("record_id").get<std::string>();
    r.behavior = policy::parse_behavior(j.at("behavior").get<std::string>());
    r.br_kind = repr::parse_br_kind(j.at("br_kind").get<std::string>());
    r.category.reset();
    if (j.contains("state_category") && !j.at("state_category").is_null()) {
      r.category = parse_category(j.at("state_category").get<std::string>());
    }
    r.role = env::parse_role(j.at("role").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed label line: ") + e.what());
  }
}

std::vector<LabeledRecord> read_labels(std::istream& in) {
  std::vector<LabeledRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<LabeledRecord>());
    } catch (const json::parse_error& e) {
      throw FormatError("label line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_labels(std::ostream& out, const std::vector<LabeledRecord>& records) {
  for (const auto& r : records) out << canonical_dump(json(r)) << '\n';
}

}  // namespace brx::eval
