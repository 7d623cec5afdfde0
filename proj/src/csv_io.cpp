#include "spacerloss/csv_io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "spacerloss/errors.hpp"

namespace spacerloss {

namespace {

template <typename T>
T parse_unsigned(const std::string& field, const char* what, std::size_t line_no) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty())
    throw InvalidArgument("line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
  return value;
}

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw InvalidArgument("cannot format double");
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',')
      out.emplace_back();
    else
      out.back() += c;
  }
  return out;
}

void write_array_table(std::ostream& out, const std::vector<LeafArrays>& replicates) {
  out << "replicate,leaf,position,spacer\n";
  for (std::size_t r = 0; r < replicates.size(); ++r) {
    const auto& rep = replicates[r];
    for (std::size_t leaf = 0; leaf < rep.size(); ++leaf) {
      const auto& arr = rep.arrays[leaf];
      for (std::size_t pos = 0; pos < arr.size(); ++pos)
        out << r << ',' << rep.labels[leaf] << ',' << pos + 1 << ',' << arr[pos] << '\n';
    }
  }
}

std::vector<LeafArrays> read_array_table(std::istream& in, const std::vector<UltrametricTree>& trees) {
  if (trees.empty()) throw InvalidArgument("array table needs at least one tree");
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no) || line != "replicate,leaf,position,spacer")
    throw InvalidArgument("array table must start with header 'replicate,leaf,position,spacer'");

  // replicate -> leaf label -> position -> spacer
  std::map<std::size_t, std::map<std::string, std::map<std::size_t, SpacerId>>> rows;
  while (next_line(in, line, line_no)) {
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw InvalidArgument("line " + std::to_string(line_no) + ": expected 4 fields");
    const auto rep = parse_unsigned<std::size_t>(f[0], "replicate", line_no);
    const auto pos = parse_unsigned<std::size_t>(f[2], "position", line_no);
    const auto id = parse_unsigned<SpacerId>(f[3], "spacer", line_no);
    if (pos == 0) throw InvalidArgument("line " + std::to_string(line_no) + ": positions start at 1");
    if (!rows[rep][f[1]].emplace(pos, id).second)
      throw InvalidArgument("line " + std::to_string(line_no) + ": duplicate position");
  }

  std::size_t count = trees.size() == 1 ? 0 : trees.size();
  if (!rows.empty()) count = std::max(count, rows.rbegin()->first + 1);
  if (trees.size() != 1 && count > trees.size())
    throw InvalidArgument("array table has more replicates than the tree file");

  std::vector<LeafArrays> out(count);
  for (std::size_t r = 0; r < count; ++r) {
    const auto& tree = trees.size() == 1 ? trees[0] : trees[r];
    auto& rep = out[r];
    rep.labels = tree.leaf_labels();
    rep.arrays.assign(rep.labels.size(), {});
    const auto it = rows.find(r);
    if (it == rows.end()) continue;
    for (const auto& [label, positions] : it->second) {
      const auto leaf = tree.find_leaf(label);
      if (!leaf) throw InvalidArgument("replicate " + std::to_string(r) + ": leaf '" + label + "' not in tree");
      auto& arr = rep.arrays[*leaf];
      std::set<SpacerId> seen;
      for (const auto& [pos, id] : positions) {
        if (pos != arr.size() + 1)
          throw InvalidArgument("replicate " + std::to_string(r) + ", leaf '" + label +
                                "': positions are not contiguous from 1");
        if (!seen.insert(id).second)
          throw InvalidArgument("replicate " + std::to_string(r) + ", leaf '" + label + "': repeated spacer");
        arr.push_back(id);
      }
    }
  }
  return out;
}

void write_tree_file(std::ostream& out, const std::vector<UltrametricTree>& trees) {
  for (const auto& t : trees) out << to_newick(t) << '\n';
}

std::vector<UltrametricTree> read_tree_file(std::istream& in) {
  std::vector<UltrametricTree> out;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line, line_no)) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(parse_newick(line));
    } catch (const NewickError& e) {
      throw NewickError("tree line " + std::to_string(line_no) + ": " + e.what(), e.position());
    }
  }
  if (out.empty()) throw InvalidArgument("tree file contains no trees");
  return out;
}

void write_stats(std::ostream& out, std::size_t sample_size, const std::vector<StatsRow>& rows) {
  if (sample_size != 2 && sample_size != 3) throw InvalidArgument("stats need sample size 2 or 3");
  const std::size_t width = sample_size == 2 ? 1 : 4;
  out << (sample_size == 2 ? "replicate,M,D\n" : "replicate,M,D1,D2,D3,D4\n");
  for (const auto& row : rows) {
    if (!row.unequal.empty() && row.unequal.size() != width)
      throw InvalidArgument("stats row width does not match the sample size");
    out << row.replicate << ',' << row.shared;
    for (std::size_t i = 0; i < width; ++i) {
      out << ',';
      if (!row.unequal.empty()) out << row.unequal[i];
    }
    out << '\n';
  }
}

std::pair<std::size_t, std::vector<StatsRow>> read_stats(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw InvalidArgument("stats file is empty");
  std::size_t sample_size = 0;
  if (line == "replicate,M,D")
    sample_size = 2;
  else if (line == "replicate,M,D1,D2,D3,D4")
    sample_size = 3;
  else
    throw InvalidArgument("unrecognised stats header '" + line + "'");
  const std::size_t width = sample_size == 2 ? 1 : 4;

  std::vector<StatsRow> rows;
  while (next_line(in, line, line_no)) {
    const auto f = split_csv_line(line);
    if (f.size() != 2 + width)
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " + std::to_string(2 + width) +
                            " fields");
    StatsRow row;
    row.replicate = parse_unsigned<std::size_t>(f[0], "replicate", line_no);
    row.shared = parse_unsigned<std::size_t>(f[1], "M", line_no);
    std::size_t empty = 0;
    for (std::size_t i = 0; i < width; ++i) empty += f[2 + i].empty();
    if (empty != 0 && empty != width)
      throw InvalidArgument("line " + std::to_string(line_no) + ": partially empty statistics");
    if (empty == 0)
      for (std::size_t i = 0; i < width; ++i)
        row.unequal.push_back(parse_unsigned<std::size_t>(f[2 + i], "D", line_no));
    rows.push_back(std::move(row));
  }
  return {sample_size, std::move(rows)};
}

void write_estimates(std::ostream& out, const std::vector<EstimateRow>& rows) {
  out << "replicate,rho_hat,theta_hat,loglik,boundary,skipped_reason\n";
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string{}; };
  for (const auto& row : rows)
    out << join({std::to_string(row.replicate), opt(row.rho_hat), opt(row.theta_hat), opt(row.loglik),
                 row.boundary ? "true" : "false", row.skipped_reason})
        << '\n';
}

}  // namespace spacerloss
