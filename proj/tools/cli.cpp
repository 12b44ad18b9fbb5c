#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "estprob/estprob.hpp"

namespace estprob::cli {
namespace {

using nlohmann::ordered_json;

struct Output {
  std::string format;  // table | json | csv
  Rounding rounding = Rounding::paper;
  std::ostream& out;

  bool json() const { return format == "json"; }
  bool csv() const { return format == "csv"; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load(const std::string& path, std::uint64_t replicate_by) {
  Dataset d = parse_dataset(read_file(path));
  if (replicate_by != 1) d = replicate(d, replicate_by);
  return d;
}

void print_json(const Output& o, const ordered_json& j) { o.out << j.dump(2) << '\n'; }

// Pads the first column of `rows` so the table reads in columns.
void print_table(const Output& o, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(widths[i] - row[i].size() + 2, ' ');
    }
    o.out << line << '\n';
  }
}

void print_csv(const Output& o, const std::vector<std::vector<std::string>>& rows) {
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) o.out << (i ? "," : "") << row[i];
    o.out << '\n';
  }
}

// ---------------------------------------------------------------------------

void cmd_describe(const Output& o, const Dataset& d) {
  if (o.json()) {
    ordered_json groups = ordered_json::array();
    for (const auto& g : d.groups()) {
      groups.push_back({{"group", g.label}, {"n", g.n}, {"mean", g.mean}, {"sd", g.sd}});
    }
    print_json(o, {{"provenance", to_string(d.provenance())}, {"groups", groups}});
    return;
  }
  std::vector<std::vector<std::string>> rows{{"group", "n", "mean", "sd"}};
  for (const auto& g : d.groups()) {
    const bool paper = o.rounding == Rounding::paper;
    rows.push_back({g.label, std::to_string(g.n), format_value(g.mean, o.rounding),
                    paper ? format_fixed(g.sd, 2) : format_number(g.sd)});
  }
  o.csv() ? print_csv(o, rows) : print_table(o, rows);
}

void cmd_ci(const Output& o, const Dataset& d, const std::string& group, double level) {
  const auto& g = d.group(group);
  const auto dist = mean_conf_dist(g);
  const auto interval = ci(dist, level);
  const std::string text = format_report(interval, g.label, {}, o.rounding);
  if (o.json()) {
    print_json(o, {{"group", g.label},
                   {"n", g.n},
                   {"level", level},
                   {"lower", interval.lower},
                   {"upper", interval.upper},
                   {"center", dist.center()},
                   {"scale", dist.scale()},
                   {"df", dist.df()},
                   {"text", text}});
  } else if (o.csv()) {
    print_csv(o, {{"group", "level", "lower", "upper"},
                  {g.label, format_number(level), format_value(interval.lower, o.rounding),
                   format_value(interval.upper, o.rounding)}});
  } else {
    o.out << text << '\n';
  }
}

struct NamedHypothesis {
  std::string key;
  std::string label;
  std::string region;
  HypothesisSpec spec;
};

void cmd_compare(const Output& o, const Dataset& d, const std::string& a_name,
                 const std::string& b_name, bool welch, double delta, double level) {
  if (a_name == b_name) throw InputError("--group-a and --group-b must differ");
  if (!(delta > 0.0)) throw InputError("--delta must be > 0");
  const auto& a = d.group(a_name);
  const auto& b = d.group(b_name);
  const auto variant = welch ? DiffVariant::welch : DiffVariant::pooled;
  const auto test = diff_means_test(a, b, variant);
  const auto dist = diff_conf_dist(a, b, variant);
  const auto interval = ci(dist, level);

  const std::string ds = format_number(delta);
  const std::vector<NamedHypothesis> hyps{
      {"a_ge_b", a_name + " >= " + b_name, "difference >= 0", AtLeast{0.0}},
      {"a_le_b", a_name + " <= " + b_name, "difference <= 0", AtMost{0.0}},
      {"a_much_greater", a_name + " >> " + b_name, "difference >= " + ds, AtLeast{delta}},
      {"approx_equal", a_name + " ~= " + b_name, "-" + ds + " <= difference <= " + ds,
       Within{-delta, delta}},
      {"a_much_less", a_name + " << " + b_name, "difference <= -" + ds, AtMost{-delta}},
  };
  std::vector<double> probs;
  for (const auto& h : hyps) probs.push_back(hypothesis_probability(dist, h.spec));

  const std::vector<std::string> names{a_name, b_name};
  const std::string test_text = format_report(test, names, o.rounding);
  const std::string prob_text =
      format_report(HypothesisProbability{AtLeast{0.0}, probs[0]}, a_name, b_name, o.rounding);
  const std::string ci_text = format_report(interval, a_name, b_name, o.rounding);

  if (o.json()) {
    ordered_json hj = ordered_json::array();
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      hj.push_back({{"name", hyps[i].key},
                    {"hypothesis", hyps[i].label},
                    {"region", hyps[i].region},
                    {"probability", probs[i]}});
    }
    print_json(o, {{"group_a", a_name},
                   {"group_b", b_name},
                   {"method", to_string(test.method)},
                   {"estimate", test.estimate},
                   {"se", test.se},
                   {"df", test.df},
                   {"statistic", test.statistic},
                   {"p_value", test.p_value},
                   {"ci", {{"level", level}, {"lower", interval.lower}, {"upper", interval.upper}}},
                   {"delta", delta},
                   {"hypotheses", hj},
                   {"report", {test_text, ci_text, prob_text}}});
    return;
  }
  if (o.csv()) {
    std::vector<std::vector<std::string>> rows{{"key", "value"},
                                               {"estimate", format_number(test.estimate)},
                                               {"p_value", format_p(test.p_value, o.rounding)},
                                               {"ci_lower", format_value(interval.lower, o.rounding, true)},
                                               {"ci_upper", format_value(interval.upper, o.rounding, true)}};
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      rows.push_back({hyps[i].key, format_percent(probs[i], o.rounding)});
    }
    print_csv(o, rows);
    return;
  }
  o.out << "Comparison: " << a_name << " - " << b_name << " (" << to_string(test.method)
        << " t test, df " << format_number(std::round(test.df * 1e4) / 1e4) << ")\n";
  print_table(o, {{"Difference in means:", format_value(test.estimate, o.rounding, true)},
                  {"p value (two-tailed):", format_p(test.p_value, o.rounding)},
                  {format_level(level) + " CI for difference:",
                   format_interval(interval, o.rounding, true)}});
  o.out << "Estimated probabilities:\n";
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    rows.push_back({"  " + hyps[i].label, "(" + hyps[i].region + ")",
                    format_percent(probs[i], o.rounding)});
  }
  print_table(o, rows);
  o.out << test_text << '\n' << ci_text << '\n' << prob_text << '\n';
}

void cmd_anova(const Output& o, const Dataset& d) {
  const auto test = anova_oneway(d.groups());
  std::vector<std::string> names;
  for (const auto& g : d.groups()) names.push_back(g.label);
  const std::string text = format_report(test, names, o.rounding);
  if (o.json()) {
    print_json(o, {{"F", test.statistic},
                   {"df1", test.df_num},
                   {"df2", test.df},
                   {"p_value", test.p_value},
                   {"groups", names},
                   {"text", text}});
  } else if (o.csv()) {
    print_csv(o, {{"F", "df1", "df2", "p_value"},
                  {format_number(test.statistic), format_number(test.df_num),
                   format_number(test.df), format_p(test.p_value, o.rounding)}});
  } else {
    const bool paper = o.rounding == Rounding::paper;
    o.out << "F(" << format_number(test.df_num) << ", " << format_number(test.df)
          << ") = " << (paper ? format_fixed(test.statistic, 2) : format_number(test.statistic))
          << ", p = " << format_p(test.p_value, o.rounding) << '\n'
          << text << '\n';
  }
}

std::string_view bound_name(Bound b) {
  switch (b) {
    case Bound::exact: return "exact";
    case Bound::greater_than: return "greater_than";
    case Bound::less_than: return "less_than";
  }
  return "exact";
}

void cmd_p2prob(const Output& o, const std::string& p_text, std::optional<double> value,
                const std::string& sign_text) {
  const Sign sign = sign_text == "negative" ? Sign::negative : Sign::positive;
  const PStatement stmt = value ? PStatement(Relation::equals, *value, sign)
                                : parse_p_statement(p_text, sign);
  const auto probs = p_to_estimated_prob(stmt);
  const std::string pos = format_bound(probs.positive, o.rounding);
  const std::string neg = format_bound(probs.negative, o.rounding);
  if (o.json()) {
    print_json(o, {{"relation", stmt.relation == Relation::equals ? "equals" : "less_than"},
                   {"p", stmt.p},
                   {"sign", sign_text},
                   {"positive", {{"value", probs.positive.value}, {"bound", bound_name(probs.positive.bound)}}},
                   {"negative", {{"value", probs.negative.value}, {"bound", bound_name(probs.negative.bound)}}}});
  } else if (o.csv()) {
    print_csv(o, {{"side", "probability"}, {"positive", pos}, {"negative", neg}});
  } else {
    o.out << "Estimated probability that the population value is positive: " << pos << '\n'
          << "Estimated probability that the population value is negative: " << neg << '\n';
  }
}

void cmd_bayes(const Output& o, double prior, double lik_h1, double lik_h0) {
  const auto b = bayes_two_hypothesis(prior, lik_h1, lik_h0);
  if (o.json()) {
    print_json(o, {{"prior", b.prior}, {"lik_h1", b.lik_h1}, {"lik_h0", b.lik_h0},
                   {"posterior", b.posterior}});
  } else if (o.csv()) {
    print_csv(o, {{"prior", "lik_h1", "lik_h0", "posterior"},
                  {format_number(b.prior), format_number(b.lik_h1), format_number(b.lik_h0),
                   format_number(b.posterior)}});
  } else {
    o.out << "Prior probability of H1: " << format_percent(b.prior, o.rounding) << '\n'
          << "Posterior probability of H1: " << format_percent(b.posterior, o.rounding) << '\n';
  }
}

void cmd_guess(const Output& o, std::uint64_t k, std::uint64_t n, double p0, double ci_level) {
  const auto test = guessing_test(k, n, p0);
  const auto interval = binomial_ci(k, n, ci_level, Sided::lower_one);
  const std::string text = format_report(test, {}, o.rounding);
  auto p_str = [&] {
    if (o.rounding == Rounding::full || test.p_value >= 0.0005) return format_p(test.p_value, o.rounding);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1e", test.p_value);
    return std::string(buf);
  }();
  if (o.json()) {
    print_json(o, {{"k", k},
                   {"n", n},
                   {"p0", p0},
                   {"estimate", test.estimate},
                   {"p_value", test.p_value},
                   {"p_underflow", test.p_underflow},
                   {"ci", {{"level", ci_level}, {"sided", "lower_one"},
                           {"lower", interval.lower}, {"upper", interval.upper}}},
                   {"text", text}});
  } else if (o.csv()) {
    print_csv(o, {{"k", "n", "p0", "p_value"},
                  {std::to_string(k), std::to_string(n), format_number(p0), p_str}});
  } else {
    o.out << "Correct: " << k << " of " << n << " (proportion " << format_number(test.estimate)
          << ")\n"
          << "p value (probability of " << k << " or more correct by guessing): " << p_str
          << (test.p_underflow ? " (below 1e-300, reported as 0)" : "") << '\n'
          << format_level(ci_level) << " lower-bound interval for the success rate: "
          << format_percent(interval.lower, o.rounding) << " to "
          << format_percent(interval.upper, o.rounding) << '\n'
          << text << '\n';
  }
}

void cmd_distcurve(const Output& o, const Dataset& d, const std::string& group,
                   const std::vector<std::string>& diff, std::size_t points, bool welch) {
  if (points < 2) throw InputError("--points must be >= 2");
  if (group.empty() == diff.empty()) throw InputError("give exactly one of --group or --diff A B");
  const bool is_diff = !diff.empty();
  if (is_diff && diff[0] == diff[1]) throw InputError("--diff needs two different groups");
  const auto dist = is_diff ? diff_conf_dist(d.group(diff[0]), d.group(diff[1]),
                                             welch ? DiffVariant::welch : DiffVariant::pooled)
                            : mean_conf_dist(d.group(group));
  const double lo = dist.center() - 4.5 * dist.scale();
  const double hi = dist.center() + 4.5 * dist.scale();
  std::vector<std::array<double, 3>> rows;
  rows.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) /
                                                      static_cast<double>(points - 1);
    rows.push_back({x, dist.pdf(x), dist.cdf(x)});
  }
  if (o.json()) {
    ordered_json pts = ordered_json::array();
    for (const auto& r : rows) pts.push_back({{"x", r[0]}, {"density", r[1]}, {"cdf", r[2]}});
    print_json(o, {{"subject", is_diff ? diff[0] + " - " + diff[1] : group},
                   {"center", dist.center()},
                   {"scale", dist.scale()},
                   {"df", dist.df()},
                   {"points", pts}});
    return;
  }
  std::vector<std::vector<std::string>> table{{"x", "density", "cdf"}};
  for (const auto& r : rows) {
    table.push_back({format_number(r[0]), format_number(r[1]), format_number(r[2])});
  }
  o.format == "table" ? print_table(o, table) : print_csv(o, table);
}

void cmd_calibrate(const Output& o, const CalibrationConfig& config, unsigned workers) {
  const auto report = run_ci_coverage(config, workers);
  const auto j = to_json(report);
  if (o.format == "table") {
    print_table(o, {{"coverage", format_number(report.coverage)},
                    {"nominal level", format_number(config.level)},
                    {"coverage se", format_number(report.coverage_se)},
                    {"ks statistic", format_number(report.ks_statistic)},
                    {"ks 1% critical", format_number(report.ks_critical_1pct)},
                    {"trials", std::to_string(report.trials)},
                    {"seed", std::to_string(report.seed)},
                    {"generator", report.generator}});
  } else if (o.csv()) {
    std::vector<std::vector<std::string>> rows{{"key", "value"}};
    for (const auto& [key, value] : j.items()) {
      rows.push_back({key, value.is_string() ? value.get<std::string>() : value.dump()});
    }
    print_csv(o, rows);
  } else {
    print_json(o, j);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence intervals, p values and estimated probabilities for hypotheses",
               "estprob"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format;
  std::string rounding = "paper";
  app.add_option("--format", format, "Output format: table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  app.add_option("--rounding", rounding, "paper (1 dp, 3 dp p values, whole %) or full")
      ->check(CLI::IsMember({"paper", "full"}));

  std::string file;
  std::uint64_t replicate_by = 1;
  auto add_input = [&](CLI::App* sub) {
    sub->add_option("file", file, "CSV with header group,value or group,n,mean,sd")->required();
    sub->add_option("--replicate", replicate_by, "Treat the data as this many concatenated copies")
        ->check(CLI::PositiveNumber);
  };

  auto* describe = app.add_subcommand("describe", "Per-group n, mean and sd");
  add_input(describe);

  std::string group;
  double level = 0.95;
  auto* ci_cmd = app.add_subcommand("ci", "Confidence interval for one group's mean");
  add_input(ci_cmd);
  ci_cmd->add_option("--group", group, "Group label")->required();
  ci_cmd->add_option("--level", level, "Confidence level in (0, 1)");

  std::string group_a;
  std::string group_b;
  bool welch = false;
  double delta = 1.0;
  auto* compare = app.add_subcommand("compare", "Two-group comparison: p value, CI, estimated probabilities");
  add_input(compare);
  compare->add_option("--group-a", group_a, "First group (difference is A - B)")->required();
  compare->add_option("--group-b", group_b, "Second group")->required();
  compare->add_flag("--welch", welch, "Welch (unequal variance) instead of pooled");
  compare->add_option("--delta", delta, "Half-width of the 'approximately equal' band");
  compare->add_option("--level", level, "Confidence level for the difference interval");

  auto* anova = app.add_subcommand("anova", "One-way ANOVA across all groups");
  add_input(anova);

  std::string p_text;
  std::optional<double> p_value;
  std::string sign = "positive";
  auto* p2prob = app.add_subcommand("p2prob", "Convert a two-tailed p value to estimated probabilities");
  auto* p_opt = p2prob->add_option("--p", p_text, "Statement such as 'p < 0.001' or 'p = 0.673'");
  auto* v_opt = p2prob->add_option("--value", p_value, "Exact p value");
  p_opt->excludes(v_opt);
  p2prob->add_option("--sign", sign, "Sign of the sample estimate")
      ->check(CLI::IsMember({"positive", "negative"}));

  double prior = 0.5;
  double lik_h1 = 1.0;
  double lik_h0 = 1.0;
  auto* bayes = app.add_subcommand("bayes", "Posterior probability of H1 against one alternative");
  bayes->add_option("--prior", prior, "Prior probability of H1")->required();
  bayes->add_option("--lik-h1", lik_h1, "P(data | H1)")->required();
  bayes->add_option("--lik-h0", lik_h0, "P(data | H0)")->required();

  std::uint64_t k = 0;
  std::uint64_t n = 0;
  double p0 = 0.0;
  double ci_level = 0.95;
  auto* guess = app.add_subcommand("guess", "Exact binomial test of the guessing hypothesis");
  guess->add_option("--k", k, "Number of correct answers")->required();
  guess->add_option("--n", n, "Number of trials")->required();
  guess->add_option("--p0", p0, "Chance of a correct answer by guessing")->required();
  guess->add_option("--ci-level", ci_level, "Level of the one-sided interval for the success rate");

  std::vector<std::string> diff;
  std::size_t points = 201;
  auto* curve = app.add_subcommand("distcurve", "Confidence distribution as (x, density, cdf) rows");
  add_input(curve);
  curve->add_option("--group", group, "Curve for this group's mean");
  curve->add_option("--diff", diff, "Curve for the difference A - B")->expected(2);
  curve->add_option("--points", points, "Number of evenly spaced points");
  curve->add_flag("--welch", welch, "Welch df for --diff");

  CalibrationConfig config;
  unsigned workers = 0;
  auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo coverage check of t intervals");
  calibrate->add_option("--true-mean", config.true_mean, "Population mean");
  calibrate->add_option("--true-sd", config.true_sd, "Population sd");
  calibrate->add_option("--n", config.n, "Sample size per replication");
  calibrate->add_option("--level", config.level, "Confidence level");
  calibrate->add_option("--trials", config.trials, "Number of replications");
  calibrate->add_option("--seed", config.seed, "64-bit seed");
  calibrate->add_option("--workers", workers, "Threads (0 = all cores); results do not depend on it");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  const bool defaults_to_json = calibrate->parsed();
  const bool defaults_to_csv = curve->parsed();
  Output o{format.empty() ? (defaults_to_json ? "json" : defaults_to_csv ? "csv" : "table") : format,
           rounding == "full" ? Rounding::full : Rounding::paper, out};

  try {
    if (describe->parsed()) {
      cmd_describe(o, load(file, replicate_by));
    } else if (ci_cmd->parsed()) {
      cmd_ci(o, load(file, replicate_by), group, level);
    } else if (compare->parsed()) {
      cmd_compare(o, load(file, replicate_by), group_a, group_b, welch, delta, level);
    } else if (anova->parsed()) {
      cmd_anova(o, load(file, replicate_by));
    } else if (p2prob->parsed()) {
      if (p_text.empty() && !p_value) throw InputError("give --p or --value");
      cmd_p2prob(o, p_text, p_value, sign);
    } else if (bayes->parsed()) {
      cmd_bayes(o, prior, lik_h1, lik_h0);
    } else if (guess->parsed()) {
      cmd_guess(o, k, n, p0, ci_level);
    } else if (curve->parsed()) {
      cmd_distcurve(o, load(file, replicate_by), group, diff, points, welch);
    } else if (calibrate->parsed()) {
      cmd_calibrate(o, config, workers);
    }
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace estprob::cli
