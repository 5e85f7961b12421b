#include "ecc/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "csv_util.hpp"
#include "ecc/error.hpp"

namespace ecc {
namespace {

using detail::Fields;
using detail::FieldScratch;
using detail::split_fields;
using detail::to_double;
using detail::to_int64;
using detail::trim;

constexpr std::string_view kGenericHeader = "user_id,item_id,value,timestamp";
constexpr std::string_view kMovieLensHeader = "userId,movieId,rating,timestamp";
constexpr std::string_view kMetadataHeader = "item_id,attribute,value";

std::string_view strip_bom(std::string_view s) {
  if (s.starts_with("\xEF\xBB\xBF")) s.remove_prefix(3);
  return s;
}

/// Line cursor that tracks 1-based line numbers and tolerates CRLF.
class LineReader {
public:
  explicit LineReader(std::string_view buffer) : rest_(strip_bom(buffer)) {}

  bool next(std::string_view& line) {
    if (rest_.empty()) return false;
    const auto nl = rest_.find('\n');
    line = rest_.substr(0, nl);
    rest_ = nl == std::string_view::npos ? std::string_view{} : rest_.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number_;
    return true;
  }
  std::size_t number() const { return number_; }

private:
  std::string_view rest_;
  std::size_t number_ = 0;
};

struct RowError {
  ErrorKind kind;
  std::string message;
};

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct RowSpec {
  std::array<std::string_view, 3> names;  // user, item, timestamp
  std::string_view value_name;            // empty for implicit logs
  char delimiter;
  std::size_t field_count;
  std::string_view header;                // empty for headerless schemas
};

RowSpec spec_for(Schema schema) {
  switch (schema) {
    case Schema::generic_csv:
      return {{"user_id", "item_id", "timestamp"}, "value", ',', 4, kGenericHeader};
    case Schema::movielens_ratings:
      return {{"userId", "movieId", "timestamp"}, "rating", ',', 4, kMovieLensHeader};
    case Schema::playlog_tsv:
      return {{"user", "item", "timestamp"}, "", '\t', 3, ""};
  }
  throw Error(ErrorKind::internal, "unhandled schema");
}

bool header_matches(std::string_view line, std::string_view expected) {
  // Tolerate whitespace around each column name.
  std::string compact;
  compact.reserve(line.size());
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '"') compact.push_back(c);
  }
  return compact == expected;
}

}  // namespace

std::string_view to_string(Schema schema) noexcept {
  switch (schema) {
    case Schema::generic_csv: return "generic-csv";
    case Schema::movielens_ratings: return "movielens-ratings";
    case Schema::playlog_tsv: return "playlog-tsv";
  }
  return "unknown";
}

Schema parse_schema(std::string_view tag) {
  if (tag == "generic-csv") return Schema::generic_csv;
  if (tag == "movielens-ratings") return Schema::movielens_ratings;
  if (tag == "playlog-tsv") return Schema::playlog_tsv;
  throw Error(ErrorKind::config,
              fmt::format("unknown schema '{}' (expected generic-csv, movielens-ratings or playlog-tsv)", tag));
}

std::uint32_t Dictionary::intern(std::string_view key) {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(keys_.size());
  keys_.emplace_back(key);
  index_.emplace(keys_.back(), id);
  return id;
}

std::optional<std::uint32_t> Dictionary::find(std::string_view key) const {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return std::nullopt;
}

void EventTable::reserve(std::size_t n) {
  users.reserve(n);
  items.reserve(n);
  values.reserve(n);
  timestamps.reserve(n);
}

void EventTable::append(std::string_view user_key, std::string_view item_key, double value,
                        Timestamp ts) {
  append(FeedbackEvent{user_dictionary.intern(user_key), item_dictionary.intern(item_key), value, ts});
}

void EventTable::append(const FeedbackEvent& e) {
  users.push_back(e.user);
  items.push_back(e.item);
  values.push_back(e.value);
  timestamps.push_back(e.timestamp);
}

EventTable select_rows(const EventTable& table, const std::vector<std::size_t>& rows) {
  EventTable out;
  out.user_dictionary = table.user_dictionary;
  out.item_dictionary = table.item_dictionary;
  out.schema = table.schema;
  out.reserve(rows.size());
  for (auto r : rows) out.append(table.event(r));
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::io, fmt::format("cannot read '{}': no such file", path.string()));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path.string()));
  const auto size = std::filesystem::file_size(path, ec);
  std::string content;
  if (!ec) content.resize(size);
  in.read(content.data(), static_cast<std::streamsize>(content.size()));
  if (in.bad() || static_cast<std::size_t>(in.gcount()) != content.size()) {
    throw Error(ErrorKind::io, fmt::format("error while reading '{}'", path.string()));
  }
  return content;
}

EventTable parse_events(const std::filesystem::path& path, Schema schema, const ParseOptions& options,
                        ParseDiagnostics* diagnostics) {
  const std::string content = read_file(path);
  return parse_events_from_buffer(content, schema, options, diagnostics);
}

EventTable parse_events_from_buffer(std::string_view content, Schema schema,
                                    const ParseOptions& options, ParseDiagnostics* diagnostics) {
  const RowSpec spec = spec_for(schema);
  EventTable table;
  table.schema = schema;
  table.reserve(static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n')) + 1);

  LineReader reader(content);
  std::string_view line;

  if (!spec.header.empty()) {
    bool have_header = false;
    while (reader.next(line)) {
      if (trim(line).empty()) continue;
      if (!header_matches(line, spec.header)) {
        throw Error(ErrorKind::parse,
                    fmt::format("line {}: expected header '{}' for schema {}, got '{}'", reader.number(),
                                spec.header, to_string(schema), line));
      }
      have_header = true;
      break;
    }
    if (!have_header) {
      throw Error(ErrorKind::parse, fmt::format("missing header '{}' for schema {}", spec.header, to_string(schema)));
    }
  }

  Fields fields;
  FieldScratch scratch;

  auto parse_row = [&](std::string_view row) -> std::optional<RowError> {
    if (!split_fields(row, spec.delimiter, spec.field_count, fields, scratch)) {
      return RowError{ErrorKind::parse,
                      fmt::format("expected {} fields separated by '{}'", spec.field_count,
                                  spec.delimiter == '\t' ? "\\t" : ",")};
    }
    const std::string_view user = fields[0];
    const std::string_view item = fields[1];
    const std::string_view ts_text = fields[spec.field_count - 1];
    if (user.empty()) return RowError{ErrorKind::parse, fmt::format("field '{}': empty key", spec.names[0])};
    if (item.empty()) return RowError{ErrorKind::parse, fmt::format("field '{}': empty key", spec.names[1])};

    double value = 1.0;
    if (!spec.value_name.empty()) {
      auto v = to_double(fields[2]);
      if (!v) {
        return RowError{ErrorKind::parse,
                        fmt::format("field '{}': cannot parse '{}' as a number", spec.value_name, fields[2])};
      }
      value = *v;
      if (schema == Schema::movielens_ratings && (value < 0.5 || value > 5.0)) {
        return RowError{ErrorKind::validation,
                        fmt::format("field 'rating': {} outside [0.5, 5]", fields[2])};
      }
      if (!(value > 0.0)) {
        return RowError{ErrorKind::validation,
                        fmt::format("field '{}': value must be positive, got {}", spec.value_name, fields[2])};
      }
    }
    auto ts = to_int64(ts_text);
    if (!ts) {
      return RowError{ErrorKind::parse,
                      fmt::format("field '{}': cannot parse '{}' as integer seconds", spec.names[2], ts_text)};
    }
    Timestamp timestamp = options.timestamps_in_ms ? floor_div(*ts, 1000) : *ts;
    table.append(user, item, value, timestamp);
    return std::nullopt;
  };

  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    if (auto err = parse_row(line)) {
      auto message = fmt::format("line {}: {}", reader.number(), err->message);
      if (!options.skip_bad_rows) throw Error(err->kind, message);
      ++table.skipped_rows;
      if (diagnostics && diagnostics->warnings.size() < options.max_reported_errors) {
        diagnostics->warnings.push_back(std::move(message));
      }
    }
  }
  return table;
}

ValidationSummary validate_table(const EventTable& table) {
  if (table.empty()) throw Error(ErrorKind::validation, "event table is empty");

  ValidationSummary s;
  s.events = table.size();

  std::vector<std::uint8_t> seen_user(table.user_count(), 0);
  std::vector<std::uint8_t> seen_item(table.item_count(), 0);
  std::vector<std::uint64_t> pairs(table.size());
  double sum = 0.0;
  s.value_min = s.value_max = table.values.front();
  s.first_timestamp = s.last_timestamp = table.timestamps.front();
  for (std::size_t r = 0; r < table.size(); ++r) {
    seen_user[table.users[r]] = 1;
    seen_item[table.items[r]] = 1;
    pairs[r] = (std::uint64_t{table.users[r]} << 32) | table.items[r];
    const double v = table.values[r];
    sum += v;
    s.value_min = std::min(s.value_min, v);
    s.value_max = std::max(s.value_max, v);
    s.first_timestamp = std::min(s.first_timestamp, table.timestamps[r]);
    s.last_timestamp = std::max(s.last_timestamp, table.timestamps[r]);
  }
  std::sort(pairs.begin(), pairs.end());
  s.distinct_pairs = static_cast<std::size_t>(std::unique(pairs.begin(), pairs.end()) - pairs.begin());
  s.users = static_cast<std::size_t>(std::count(seen_user.begin(), seen_user.end(), 1));
  s.items = static_cast<std::size_t>(std::count(seen_item.begin(), seen_item.end(), 1));
  s.value_mean = sum / static_cast<double>(s.events);
  s.density = static_cast<double>(s.distinct_pairs) /
              (static_cast<double>(s.users) * static_cast<double>(s.items));
  return s;
}

const AttributeValue* ItemMetadata::find(ItemId item, const std::string& attribute) const {
  auto it = attributes.find(item);
  if (it == attributes.end()) return nullptr;
  auto jt = it->second.find(attribute);
  return jt == it->second.end() ? nullptr : &jt->second;
}

ItemMetadata parse_item_metadata(const std::filesystem::path& path, const Dictionary& items) {
  return parse_item_metadata_from_buffer(read_file(path), items);
}

ItemMetadata parse_item_metadata_from_buffer(std::string_view content, const Dictionary& items) {
  ItemMetadata meta;
  LineReader reader(content);
  std::string_view line;
  bool have_header = false;
  Fields fields;
  FieldScratch scratch;
  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    if (!have_header) {
      if (!header_matches(line, kMetadataHeader)) {
        throw Error(ErrorKind::parse, fmt::format("line {}: expected header '{}'", reader.number(), kMetadataHeader));
      }
      have_header = true;
      continue;
    }
    if (!split_fields(line, ',', 3, fields, scratch)) {
      throw Error(ErrorKind::parse, fmt::format("line {}: expected 3 fields", reader.number()));
    }
    auto id = items.find(fields[0]);
    if (!id) {
      throw Error(ErrorKind::validation,
                  fmt::format("line {}: item '{}' does not appear in the event log", reader.number(), fields[0]));
    }
    if (fields[1].empty()) {
      throw Error(ErrorKind::parse, fmt::format("line {}: field 'attribute': empty name", reader.number()));
    }
    AttributeValue value;
    if (auto num = to_double(fields[2])) {
      value = *num;
    } else {
      value = std::string(fields[2]);
    }
    meta.attributes[*id][std::string(fields[1])] = std::move(value);
  }
  if (!have_header) throw Error(ErrorKind::parse, "metadata sidecar is empty");
  return meta;
}

}  // namespace ecc
