#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace ecc {

using UserId = std::uint32_t;
using ItemId = std::uint32_t;
using Timestamp = std::int64_t;  // seconds since the Unix epoch

enum class Schema { generic_csv, movielens_ratings, playlog_tsv };

std::string_view to_string(Schema schema) noexcept;
/// Throws Error(config) for an unknown tag.
Schema parse_schema(std::string_view tag);

struct FeedbackEvent {
  UserId user = 0;
  ItemId item = 0;
  double value = 0.0;
  Timestamp timestamp = 0;

  friend bool operator==(const FeedbackEvent&, const FeedbackEvent&) = default;
};

/// Bijective mapping between original string keys and dense ids, assigned in
/// first-appearance order.
class Dictionary {
public:
  std::uint32_t intern(std::string_view key);
  std::optional<std::uint32_t> find(std::string_view key) const;
  const std::string& key(std::uint32_t id) const { return keys_.at(id); }
  std::size_t size() const noexcept { return keys_.size(); }
  const std::vector<std::string>& keys() const noexcept { return keys_; }

  friend bool operator==(const Dictionary& a, const Dictionary& b) { return a.keys_ == b.keys_; }

private:
  struct KeyHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::uint32_t, KeyHash, std::equal_to<>> index_;
};

/// Columnar event log. Rows keep input order.
struct EventTable {
  std::vector<UserId> users;
  std::vector<ItemId> items;
  std::vector<double> values;
  std::vector<Timestamp> timestamps;
  Dictionary user_dictionary;
  Dictionary item_dictionary;
  Schema schema = Schema::generic_csv;
  std::size_t skipped_rows = 0;

  std::size_t size() const noexcept { return users.size(); }
  bool empty() const noexcept { return users.empty(); }
  FeedbackEvent event(std::size_t row) const {
    return {users[row], items[row], values[row], timestamps[row]};
  }
  void reserve(std::size_t n);
  /// Interns both keys and appends one row.
  void append(std::string_view user_key, std::string_view item_key, double value, Timestamp ts);
  /// Appends a row with already-interned ids.
  void append(const FeedbackEvent& e);
  std::size_t user_count() const noexcept { return user_dictionary.size(); }
  std::size_t item_count() const noexcept { return item_dictionary.size(); }
};

/// Subset of rows (in order) that keeps both dictionaries intact, so ids stay
/// comparable with the source table.
EventTable select_rows(const EventTable& table, const std::vector<std::size_t>& rows);

struct ParseOptions {
  bool skip_bad_rows = false;
  bool timestamps_in_ms = false;
  std::size_t max_reported_errors = 20;
};

struct ParseDiagnostics {
  std::vector<std::string> warnings;  // first few skipped-row messages
};

EventTable parse_events(const std::filesystem::path& path, Schema schema,
                        const ParseOptions& options = {},
                        ParseDiagnostics* diagnostics = nullptr);

/// Parses an in-memory buffer; used by parse_events after reading the file.
EventTable parse_events_from_buffer(std::string_view content, Schema schema,
                                    const ParseOptions& options = {},
                                    ParseDiagnostics* diagnostics = nullptr);

/// Mirrors the per-dataset statistics table (|U|, |I|, logs, value range, mean, density).
struct ValidationSummary {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t events = 0;
  std::size_t distinct_pairs = 0;
  double value_min = 0.0;
  double value_max = 0.0;
  double value_mean = 0.0;
  Timestamp first_timestamp = 0;
  Timestamp last_timestamp = 0;
  double density = 0.0;  // distinct (user, item) pairs / (|U| * |I|)
};

ValidationSummary validate_table(const EventTable& table);

using AttributeValue = std::variant<std::string, double>;

/// Optional per-item attributes (e.g. artist) loaded from a sidecar CSV.
struct ItemMetadata {
  std::unordered_map<ItemId, std::map<std::string, AttributeValue>> attributes;

  const AttributeValue* find(ItemId item, const std::string& attribute) const;
};

/// Reads `item_id,attribute,value`. Every item must exist in `items`.
ItemMetadata parse_item_metadata(const std::filesystem::path& path, const Dictionary& items);
ItemMetadata parse_item_metadata_from_buffer(std::string_view content, const Dictionary& items);

/// Reads a whole file; Error(io) when missing or unreadable.
std::string read_file(const std::filesystem::path& path);

}  // namespace ecc
