#pragma once

// CSV and Markdown rendering of curves, convergence tables and FEM runs.
// CSV numbers carry 17 significant digits so they parse back to the same
// doubles; Markdown numbers carry 5, in the 1.2345e-04 style.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "lumpcorr/experiments.hpp"

namespace lumpcorr {

using TextRow = std::vector<std::string>;

/// Round-trip decimal form of x.
inline std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// x in scientific notation with `digits` significant digits.
inline std::string format_sci(double x, int digits = 5) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  return buf;
}

/// format_sci without exponent padding: 2.6315e-4 rather than 2.6315e-04.
inline std::string format_compact(double x, int digits = 5) {
  std::string s = format_sci(x, digits);
  const auto e = s.find('e');
  if (e == std::string::npos)
    return s;
  std::string mant = s.substr(0, e);
  std::string exp = s.substr(e + 1);
  std::string sign;
  if (!exp.empty() && (exp[0] == '+' || exp[0] == '-')) {
    if (exp[0] == '-')
      sign = "-";
    exp.erase(0, 1);
  }
  const auto nz = exp.find_first_not_of('0');
  exp = nz == std::string::npos ? "0" : exp.substr(nz);
  return mant + "e" + (exp == "0" ? "" : sign) + exp;
}

inline std::string csv(const TextRow& header, const std::vector<TextRow>& rows) {
  auto line = [](const TextRow& r) {
    std::string s;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i)
        s += ',';
      s += r[i];
    }
    return s + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows)
    out += line(r);
  return out;
}

inline std::string markdown(const TextRow& header, const std::vector<TextRow>& rows) {
  auto line = [](const TextRow& r) {
    std::string s = "|";
    for (const auto& c : r)
      s += " " + c + " |";
    return s + "\n";
  };
  std::string out = line(header);
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i)
    out += i == 0 ? " --- |" : " ---: |";
  out += "\n";
  for (const auto& r : rows)
    out += line(r);
  return out;
}

enum class OutputFormat { Csv, Markdown };

namespace detail {

inline std::string pair_tag(const SchemePair& p) {
  return p.first.label() + "_" + p.second.label();
}

} // namespace detail

/// One CSV row per node count: errors per scheme, then per pair the
/// relative-error difference, the squared max-norm gap and its order.
inline std::string convergence_csv(const ConvergenceTable& t) {
  TextRow header{"N", "h", "tau"};
  for (const auto& s : t.schemes) {
    header.push_back("inf_rel_" + s.label());
    header.push_back("inf_abs_" + s.label());
    header.push_back("l2_rel_" + s.label());
  }
  for (const auto& p : t.pairs) {
    header.push_back("diff_" + detail::pair_tag(p));
    header.push_back("gap_" + detail::pair_tag(p));
    header.push_back("P_" + detail::pair_tag(p));
  }
  std::vector<TextRow> rows;
  for (const auto& c : t.columns) {
    TextRow r{std::to_string(c.n_nodes), format_full(c.h), format_full(c.tau)};
    for (const auto& e : c.errors) {
      r.push_back(format_full(e.inf_rel));
      r.push_back(format_full(e.inf_abs));
      r.push_back(format_full(e.l2_rel));
    }
    for (std::size_t q = 0; q < t.pairs.size(); ++q) {
      r.push_back(format_full(c.rel_diffs[q]));
      r.push_back(format_full(c.gaps[q]));
      r.push_back(c.orders.empty() || !c.orders[q] ? "" : format_full(*c.orders[q]));
    }
    rows.push_back(std::move(r));
  }
  return csv(header, rows);
}

/// Node counts across, value rows down: relative max-norm errors, their
/// pairwise differences, then empirical orders.
inline std::string convergence_markdown(const ConvergenceTable& t) {
  TextRow header{"Value"};
  for (const auto& c : t.columns)
    header.push_back(std::to_string(c.n_nodes));
  std::vector<TextRow> rows;
  for (std::size_t i = 0; i < t.schemes.size(); ++i) {
    TextRow r{"err_" + t.schemes[i].label() + " inf,rel"};
    for (const auto& c : t.columns)
      r.push_back(format_sci(c.errors[i].inf_rel));
    rows.push_back(std::move(r));
  }
  for (std::size_t q = 0; q < t.pairs.size(); ++q) {
    TextRow r{"err_" + t.pairs[q].first.label() + " - err_" + t.pairs[q].second.label()};
    for (const auto& c : t.columns)
      r.push_back(format_sci(c.rel_diffs[q]));
    rows.push_back(std::move(r));
  }
  for (std::size_t q = 0; q < t.pairs.size(); ++q) {
    TextRow r{"P_" + t.pairs[q].first.label() + "," + t.pairs[q].second.label()};
    for (const auto& c : t.columns) {
      if (c.orders.empty())
        r.push_back("-");
      else if (!c.orders[q])
        r.push_back("sign change");
      else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", *c.orders[q]);
        r.push_back(buf);
      }
    }
    rows.push_back(std::move(r));
  }
  return markdown(header, rows);
}

inline std::string fem_csv(const std::vector<FemResult>& results) {
  std::vector<TextRow> rows;
  for (const auto& r : results)
    rows.push_back({r.scheme.label(), format_full(r.errors.inf_abs), format_full(r.errors.inf_rel),
                    format_full(r.errors.l2_rel), std::to_string(r.errors.excluded_nodes),
                    format_full(r.tau), format_full(r.time_error)});
  return csv({"scheme", "inf_abs", "inf_rel", "l2_rel", "excluded", "tau", "time_error"}, rows);
}

/// Value rows for the relative max norm and the discrete l2 norm of each
/// scheme, in one column headed by the mesh label.
inline std::string fem_markdown(const std::vector<FemResult>& results, const std::string& label) {
  std::vector<TextRow> rows;
  for (const auto& r : results)
    rows.push_back({"err_" + r.scheme.label() + " inf,rel", format_sci(r.errors.inf_rel)});
  for (const auto& r : results)
    rows.push_back({"err_" + r.scheme.label() + " 2,dis", format_sci(r.errors.l2_rel)});
  return markdown({"Value", label}, rows);
}

} // namespace lumpcorr
