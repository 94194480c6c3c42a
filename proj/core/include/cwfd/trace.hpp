#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwfd {

/// Packet direction. +1 is client to server, -1 is server to client. 0 only
/// ever appears as the padding sentinel produced by pad_or_truncate.
using Direction = std::int8_t;

inline constexpr Direction kOutgoing = 1;
inline constexpr Direction kIncoming = -1;
inline constexpr Direction kPad = 0;

struct PacketEvent {
  double timestamp = 0.0;
  Direction direction = kOutgoing;

  friend bool operator==(const PacketEvent&, const PacketEvent&) = default;
};

/// An ordered sequence of packet events for one page load.
///
/// Construction validates that every direction is +1 or -1, every timestamp
/// is non-negative, and timestamps never decrease.
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<PacketEvent> events);

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const std::vector<PacketEvent>& events() const { return events_; }
  const PacketEvent& operator[](std::size_t i) const { return events_[i]; }

  /// Timestamp of the final event, 0 for an empty trace.
  double duration() const;
  std::size_t count(Direction d) const;

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<PacketEvent> events_;
};

struct DatasetEntry {
  std::string name;  // file name inside the dataset directory
  Trace trace;
  int label = 0;
  bool poisoned = false;

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct LabeledDataset {
  std::vector<DatasetEntry> entries;
  int class_count = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<int> labels() const;
  std::size_t count_label(int label) const;

  /// Throws std::invalid_argument when a label is out of range.
  void validate() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

class DatasetParseError : public std::runtime_error {
 public:
  DatasetParseError(std::string file, std::size_t line, const std::string& what);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

struct LoadOptions {
  // First K files per class in filename order.
  std::optional<std::size_t> per_class_cap;
  // Files named `<instance>` become the sentinel class C-1.
  bool open_world = false;
  unsigned jobs = 1;
};

/// Non-fatal findings while loading (empty files, unrecognized names).
struct LoadDiagnostics {
  std::vector<std::string> warnings;
};

/// Parses one trace file body. `file` is only used in error messages.
Trace parse_trace(std::string_view text, const std::string& file);

/// Loads `<label>-<instance>` (and, in open-world mode, `<instance>`) files.
/// Entries are ordered lexicographically by file name.
LabeledDataset load_dataset(const std::filesystem::path& root,
                            const LoadOptions& options = {},
                            LoadDiagnostics* diagnostics = nullptr);

/// Canonical text form of a trace: `timestamp<TAB>direction` per line.
std::string format_trace(const Trace& trace);

/// Writes every entry under `dir` using its stored name. Each file is
/// written atomically.
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);

std::vector<Direction> direction_sequence(const Trace& trace);

/// Right-pads with kPad or cuts to exactly `target_len` entries.
std::vector<Direction> pad_or_truncate(std::span<const Direction> seq,
                                       std::size_t target_len);

}  // namespace cwfd
