#include "cwfd/trace.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "cwfd/util.hpp"

namespace cwfd {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_int(std::string_view s, long long& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

struct NamedFile {
  std::string name;
  std::filesystem::path path;
  int label = -1;  // -1 marks an unmonitored instance
};

}  // namespace

Trace::Trace(std::vector<PacketEvent> events) : events_(std::move(events)) {
  double last = 0.0;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (e.direction != kOutgoing && e.direction != kIncoming) {
      throw std::invalid_argument("event " + std::to_string(i) + ": direction must be +1 or -1");
    }
    if (!(e.timestamp >= 0.0)) {
      throw std::invalid_argument("event " + std::to_string(i) + ": negative timestamp");
    }
    if (e.timestamp < last) {
      throw std::invalid_argument("event " + std::to_string(i) + ": timestamps decrease");
    }
    last = e.timestamp;
  }
}

double Trace::duration() const { return events_.empty() ? 0.0 : events_.back().timestamp; }

std::size_t Trace::count(Direction d) const {
  return static_cast<std::size_t>(
      std::count_if(events_.begin(), events_.end(), [d](const PacketEvent& e) { return e.direction == d; }));
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.label);
  return out;
}

std::size_t LabeledDataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [label](const DatasetEntry& e) { return e.label == label; }));
}

void LabeledDataset::validate() const {
  for (const auto& e : entries) {
    if (e.label < 0 || e.label >= class_count) {
      throw std::invalid_argument("entry " + e.name + ": label " + std::to_string(e.label) +
                                  " outside [0, " + std::to_string(class_count) + ")");
    }
  }
}

DatasetParseError::DatasetParseError(std::string file, std::size_t line, const std::string& what)
    : std::runtime_error("parse error in " + file + " line " + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

Trace parse_trace(std::string_view text, const std::string& file) {
  std::vector<PacketEvent> events;
  std::size_t line_no = 0;
  double last = 0.0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    const auto sep = line.find_first_of("\t ");
    if (sep == std::string_view::npos) {
      throw DatasetParseError(file, line_no, "expected timestamp<TAB>direction");
    }
    const auto ts_text = trim(line.substr(0, sep));
    const auto dir_text = trim(line.substr(sep + 1));
    PacketEvent ev;
    long long dir = 0;
    if (!parse_real(ts_text, ev.timestamp) || !(ev.timestamp >= 0.0)) {
      throw DatasetParseError(file, line_no, "bad timestamp '" + std::string(ts_text) + "'");
    }
    if (!parse_int(dir_text, dir) || (dir != 1 && dir != -1)) {
      throw DatasetParseError(file, line_no, "bad direction '" + std::string(dir_text) + "'");
    }
    if (ev.timestamp < last) {
      throw DatasetParseError(file, line_no, "timestamps decrease");
    }
    last = ev.timestamp;
    ev.direction = static_cast<Direction>(dir);
    events.push_back(ev);
  }
  return Trace(std::move(events));
}

LabeledDataset load_dataset(const std::filesystem::path& root, const LoadOptions& options,
                            LoadDiagnostics* diagnostics) {
  auto warn = [&](std::string msg) {
    if (diagnostics) diagnostics->warnings.push_back(std::move(msg));
  };
  if (!std::filesystem::is_directory(root)) {
    throw std::runtime_error("dataset root is not a directory: " + root.string());
  }

  std::vector<NamedFile> files;
  for (const auto& de : std::filesystem::directory_iterator(root)) {
    if (!de.is_regular_file()) continue;
    NamedFile f{de.path().filename().string(), de.path()};
    if (f.name.starts_with('.') || f.name.ends_with(".tmp")) continue;
    const auto dash = f.name.find('-');
    long long label = 0;
    if (dash != std::string::npos) {
      long long instance = 0;
      if (!parse_int(std::string_view(f.name).substr(0, dash), label) || label < 0 ||
          !parse_int(std::string_view(f.name).substr(dash + 1), instance)) {
        warn("skipping unrecognized file name " + f.name);
        continue;
      }
      f.label = static_cast<int>(label);
    } else {
      long long instance = 0;
      if (!parse_int(f.name, instance)) {
        warn("skipping unrecognized file name " + f.name);
        continue;
      }
      if (!options.open_world) {
        warn("skipping unmonitored file " + f.name + " (open-world mode off)");
        continue;
      }
    }
    files.push_back(std::move(f));
  }
  std::sort(files.begin(), files.end(),
            [](const NamedFile& a, const NamedFile& b) { return a.name < b.name; });

  if (options.per_class_cap) {
    std::map<int, std::size_t> taken;
    std::erase_if(files, [&](const NamedFile& f) { return taken[f.label]++ >= *options.per_class_cap; });
  }

  std::vector<Trace> traces(files.size());
  parallel_for(files.size(), options.jobs, [&](std::size_t i) {
    traces[i] = parse_trace(read_file(files[i].path), files[i].name);
  });

  int max_label = -1;
  for (const auto& f : files) max_label = std::max(max_label, f.label);

  LabeledDataset ds;
  ds.class_count = max_label + 1;
  const bool any_unmonitored =
      std::any_of(files.begin(), files.end(), [](const NamedFile& f) { return f.label < 0; });
  if (options.open_world && any_unmonitored) ds.class_count = max_label + 2;

  for (std::size_t i = 0; i < files.size(); ++i) {
    if (traces[i].empty()) {
      warn("skipping empty file " + files[i].name);
      continue;
    }
    const int label = files[i].label < 0 ? ds.class_count - 1 : files[i].label;
    ds.entries.push_back({files[i].name, std::move(traces[i]), label, false});
  }
  return ds;
}

std::string format_trace(const Trace& trace) {
  std::string out;
  out.reserve(trace.size() * 12);
  for (const auto& e : trace.events()) {
    out += format_double(e.timestamp);
    out += '\t';
    out += e.direction > 0 ? "1" : "-1";
    out += '\n';
  }
  return out;
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& e : dataset.entries) {
    write_file_atomic(dir / e.name, format_trace(e.trace));
  }
}

std::vector<Direction> direction_sequence(const Trace& trace) {
  std::vector<Direction> out;
  out.reserve(trace.size());
  for (const auto& e : trace.events()) out.push_back(e.direction);
  return out;
}

std::vector<Direction> pad_or_truncate(std::span<const Direction> seq, std::size_t target_len) {
  if (target_len == 0) throw std::invalid_argument("pad_or_truncate: target_len must be >= 1");
  std::vector<Direction> out(target_len, kPad);
  std::copy_n(seq.begin(), std::min(seq.size(), target_len), out.begin());
  return out;
}

}  // namespace cwfd
