#include "evp/autotune.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace evp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(std::string_view text, std::size_t line) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ParseError(line, "expected an integer, got '" + std::string(text) + "'");
  return v;
}

std::string axis_values_text(const AutotuneAxis& axis) {
  std::string s;
  for (std::size_t i = 0; i < axis.values.size(); ++i) {
    if (i) s += ", ";
    s += to_text(axis.values[i]);
  }
  return s;
}

void update_best(AutotuneState& st, const AutotuneTiming& t) {
  if (!st.best_index) {
    st.best_index = t.index;
    return;
  }
  for (const auto& r : st.timings) {
    if (r.index != *st.best_index) continue;
    if (t.nanoseconds < r.nanoseconds || (t.nanoseconds == r.nanoseconds && t.index < r.index))
      st.best_index = t.index;
    return;
  }
}

// Moves a completed probe sample into the timing table.
void harvest(AutotuneState& st) {
  if (!st.pending || !st.probe || !st.probe->sample_ns) return;
  const AutotuneTiming t{st.cursor, *st.probe->sample_ns};
  st.probe->sample_ns.reset();
  st.probe->armed = false;
  update_best(st, t);
  st.timings.push_back(t);
  ++st.cursor;
  st.pending = false;
}

void apply(Solver& h, const AutotuneState& st, std::int64_t index) {
  for (const auto& [name, value] : st.combination(index)) h.set_tuned(name, value);
}

}  // namespace

std::string_view to_string(AutotuneLevel level) {
  return level == AutotuneLevel::fast ? "fast" : "medium";
}

AutotuneLevel parse_autotune_level(std::string_view text) {
  if (text == "fast" || text == "FAST") return AutotuneLevel::fast;
  if (text == "medium" || text == "MEDIUM") return AutotuneLevel::medium;
  throw ArgumentError("unknown autotune level '" + std::string(text) + "'");
}

std::vector<std::string> level_parameters(AutotuneLevel level) {
  if (level == AutotuneLevel::fast) return {"kernel"};
  return {"kernel", "band_width", "backtransform_block", "tridiag_block", "solver"};
}

std::int64_t AutotuneState::combinations() const {
  std::int64_t total = 1;
  for (const auto& a : axes) total *= static_cast<std::int64_t>(a.values.size());
  return total;
}

std::vector<std::pair<std::string, ParamValue>> AutotuneState::combination(std::int64_t index) const {
  if (index < 0 || index >= combinations())
    throw ArgumentError("autotune combination " + std::to_string(index) + " out of range");
  std::vector<std::pair<std::string, ParamValue>> out(axes.size());
  for (std::size_t i = axes.size(); i-- > 0;) {
    const auto m = static_cast<std::int64_t>(axes[i].values.size());
    out[i] = {axes[i].name, axes[i].values[static_cast<std::size_t>(index % m)]};
    index /= m;
  }
  return out;
}

AutotuneState autotune_setup(Solver& h, AutotuneLevel level) {
  if (h.state() != SolverState::ready) throw StateError("autotune_setup: solver handle is not set up");
  AutotuneState st;
  st.level = level;
  st.na = h.get_int("na");
  for (const auto& name : level_parameters(level)) {
    if (h.is_user_set(name)) continue;
    const auto& d = h.parameters().registry().find(name);
    st.axes.push_back({d.name, d.domain});
  }
  st.probe = std::make_shared<TimingProbe>();
  return st;
}

bool autotune_step(Solver& h, AutotuneState& state) {
  if (state.pending) {
    if (!state.probe || !state.probe->sample_ns)
      throw AutotuneError("autotune_step called again before a solve timed the previous combination");
    harvest(state);
  }
  if (state.finished || state.cursor >= state.combinations()) {
    state.finished = true;
    if (state.probe) state.probe->armed = false;
    return false;
  }
  if (!state.probe) state.probe = std::make_shared<TimingProbe>();
  apply(h, state, state.cursor);
  state.probe->sample_ns.reset();
  state.probe->armed = true;
  h.attach_probe(state.probe);
  state.pending = true;
  return true;
}

void autotune_set_best(Solver& h, AutotuneState& state) {
  harvest(state);
  if (!state.best_index) throw AutotuneError("autotune_set_best: no combination has been timed yet");
  if (state.probe) state.probe->armed = false;
  apply(h, state, *state.best_index);
}

std::vector<ConfirmedTiming> autotune_confirm(Solver& h, AutotuneState& state, int top, int repeats,
                                              const std::function<void(Solver&)>& solve) {
  harvest(state);
  if (state.timings.empty()) throw AutotuneError("autotune_confirm: no combination has been timed yet");
  if (top < 1 || repeats < 1) throw ArgumentError("autotune_confirm: top and repeats must be positive");
  if (state.probe) state.probe->armed = false;

  std::vector<AutotuneTiming> ranked = state.timings;
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.nanoseconds < y.nanoseconds || (x.nanoseconds == y.nanoseconds && x.index < y.index);
  });
  ranked.resize(std::min(ranked.size(), static_cast<std::size_t>(top)));

  std::vector<std::vector<std::int64_t>> samples(ranked.size());
  for (int r = 0; r < repeats; ++r)
    for (std::size_t c = 0; c < ranked.size(); ++c) {
      apply(h, state, ranked[c].index);
      solve(h);
      samples[c].push_back(h.last_solve_ns());
    }

  std::vector<ConfirmedTiming> out;
  std::size_t winner = 0;
  for (std::size_t c = 0; c < ranked.size(); ++c) {
    auto& s = samples[c];
    std::sort(s.begin(), s.end());
    const auto m = s.size() / 2;
    const std::int64_t med = s.size() % 2 ? s[m] : (s[m - 1] + s[m]) / 2;
    out.push_back({ranked[c].index, ranked[c].nanoseconds, med});
    if (med < out[winner].median_ns) winner = c;
  }
  apply(h, state, out[winner].index);
  return out;
}

std::string autotune_report(const AutotuneState& state) {
  std::ostringstream os;
  os << "autotune " << to_string(state.level) << ": " << state.timings.size() << " of "
     << state.combinations() << " combinations timed\n";
  for (const auto& t : state.timings) {
    os << (state.best_index && *state.best_index == t.index ? "* " : "  ");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%5lld %12.6f s ", static_cast<long long>(t.index),
                  static_cast<double>(t.nanoseconds) * 1e-9);
    os << buf;
    bool first = true;
    for (const auto& [name, value] : state.combination(t.index)) {
      os << (first ? "" : " ") << name << "=" << to_text(value);
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

std::string autotune_state_text(AutotuneState& state) {
  harvest(state);
  std::ostringstream os;
  os << "# evp autotune snapshot\n[autotune]\n";
  os << "level = " << to_string(state.level) << "\n";
  os << "na = " << state.na << "\n";
  os << "cursor = " << state.cursor << "\n";
  for (const auto& a : state.axes) os << "axis." << a.name << " = " << axis_values_text(a) << "\n";
  os << "[timings]\n";
  for (const auto& t : state.timings) os << t.index << " = " << t.nanoseconds << "\n";
  return os.str();
}

void autotune_save_state(AutotuneState& state, const std::filesystem::path& path) {
  const std::string text = autotune_state_text(state);
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

AutotuneState autotune_state_from_text(Solver& h, std::string_view text) {
  std::optional<AutotuneLevel> level;
  std::optional<std::int64_t> na, cursor;
  std::vector<std::pair<std::string, std::string>> axes;
  std::vector<AutotuneTiming> timings;
  enum class Section { none, autotune, timings } section = Section::none;

  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[autotune]") {
      section = Section::autotune;
      continue;
    }
    if (line == "[timings]") {
      section = Section::timings;
      continue;
    }
    if (line.front() == '[') throw ParseError(line_no, "unknown section " + std::string(line));
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'name = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (section == Section::timings) {
      timings.push_back({parse_int(key, line_no), parse_int(value, line_no)});
    } else if (section == Section::autotune) {
      if (key == "level") {
        try {
          level = parse_autotune_level(value);
        } catch (const ArgumentError& e) {
          throw ParseError(line_no, e.what());
        }
      } else if (key == "na") {
        na = parse_int(value, line_no);
      } else if (key == "cursor") {
        cursor = parse_int(value, line_no);
      } else if (key.substr(0, 5) == "axis.") {
        axes.emplace_back(std::string(key.substr(5)), std::string(value));
      } else {
        throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
      }
    } else {
      throw ParseError(line_no, "entry outside of a section");
    }
  }
  if (!level || !na || !cursor) throw ParseError(line_no, "snapshot lacks level, na or cursor");

  AutotuneState st = autotune_setup(h, *level);
  if (*na != st.na)
    throw AutotuneError("snapshot was taken for na = " + std::to_string(*na) +
                        " but the handle has na = " + std::to_string(st.na));
  if (axes.size() != st.axes.size())
    throw AutotuneError("snapshot sweeps " + std::to_string(axes.size()) +
                        " parameters but the handle would sweep " + std::to_string(st.axes.size()));
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& expect = st.axes[i];
    if (axes[i].first != expect.name)
      throw AutotuneError("snapshot axis " + std::to_string(i) + " is '" + axes[i].first +
                          "', expected '" + expect.name + "'");
    if (axes[i].second != axis_values_text(expect))
      throw AutotuneError("domain of '" + expect.name + "' changed: snapshot has {" +
                          axes[i].second + "}, registry has {" + axis_values_text(expect) + "}");
  }
  const auto total = st.combinations();
  if (*cursor < 0 || *cursor > total)
    throw AutotuneError("snapshot cursor " + std::to_string(*cursor) + " outside [0, " +
                        std::to_string(total) + "]");
  std::set<std::int64_t> seen;
  for (const auto& t : timings) {
    if (t.index < 0 || t.index >= *cursor || !seen.insert(t.index).second || t.nanoseconds < 0)
      throw AutotuneError("snapshot timing for combination " + std::to_string(t.index) +
                          " is inconsistent with cursor " + std::to_string(*cursor));
  }
  if (static_cast<std::int64_t>(seen.size()) != *cursor)
    throw AutotuneError("snapshot records " + std::to_string(seen.size()) + " timings for cursor " +
                        std::to_string(*cursor));

  st.cursor = *cursor;
  for (const auto& t : timings) {
    update_best(st, t);
    st.timings.push_back(t);
  }
  st.finished = st.cursor == total;
  return st;
}

AutotuneState autotune_load_state(Solver& h, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open autotune snapshot '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return autotune_state_from_text(h, text.str());
}

}  // namespace evp
