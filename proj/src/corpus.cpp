#include "reviewlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

namespace reviewlab {
namespace {

using nlohmann::json;

// Lowercase + whitespace-collapse; the text identity used when collapsing
// mechanical cross-postings.
std::string normalize_text_loose(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

int require_int(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CorpusError(line, key, "missing field");
  if (!it->is_number_integer())
    throw CorpusError(line, key, "expected an integer");
  return it->get<int>();
}

std::string require_string(const json& obj, const char* key,
                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CorpusError(line, key, "missing field");
  if (!it->is_string()) throw CorpusError(line, key, "expected a string");
  return it->get<std::string>();
}

Review review_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw CorpusError(line, "", "expected a JSON object");
  Review r;
  r.review_id = require_string(obj, "review_id", line);
  r.product_id = require_string(obj, "product_id", line);
  r.star_rating = require_int(obj, "star_rating", line);
  r.helpful_votes = require_int(obj, "helpful_votes", line);
  r.total_votes = require_int(obj, "total_votes", line);
  if (auto it = obj.find("text"); it != obj.end()) {
    if (!it->is_string()) throw CorpusError(line, "text", "expected a string");
    r.text = it->get<std::string>();
  }
  if (auto it = obj.find("version_group"); it != obj.end() && !it->is_null()) {
    if (!it->is_string())
      throw CorpusError(line, "version_group", "expected a string");
    r.version_group = it->get<std::string>();
  }
  return r;
}

// RFC-4180 record reader: quoted fields may contain commas, quotes ("")
// and newlines. Returns false at end of stream. `line` tracks the record's
// starting line for diagnostics.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                     std::size_t& line, std::size_t& next_line) {
  fields.clear();
  int c = in.get();
  // Skip blank lines between records.
  while (c == '\n' || c == '\r') {
    if (c == '\n') ++next_line;
    c = in.get();
  }
  if (c == EOF) return false;
  line = next_line;
  std::string field;
  bool quoted = false;
  while (true) {
    if (quoted) {
      if (c == EOF) throw CorpusError(line, "", "unterminated quoted field");
      if (c == '"') {
        int peek = in.get();
        if (peek == '"') {
          field.push_back('"');
        } else {
          quoted = false;
          c = peek;
          continue;
        }
      } else {
        if (c == '\n') ++next_line;
        field.push_back(static_cast<char>(c));
      }
    } else {
      if (c == EOF || c == '\n' || c == '\r') {
        fields.push_back(std::move(field));
        if (c == '\r' && in.peek() == '\n') in.get();
        if (c == '\n' || c == '\r') ++next_line;
        return true;
      }
      if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else {
        field.push_back(static_cast<char>(c));
      }
    }
    c = in.get();
  }
}

int parse_int_field(const std::string& value, const std::string& name,
                    std::size_t line) {
  if (value.empty()) throw CorpusError(line, name, "empty integer field");
  try {
    std::size_t pos = 0;
    int v = std::stoi(value, &pos);
    if (pos != value.size())
      throw CorpusError(line, name, "trailing characters in integer");
    return v;
  } catch (const CorpusError&) {
    throw;
  } catch (const std::exception&) {
    throw CorpusError(line, name, "not an integer: '" + value + "'");
  }
}

Corpus load_csv(std::istream& source, std::string label) {
  Corpus corpus;
  corpus.label = std::move(label);
  std::vector<std::string> fields;
  std::size_t line = 1, next_line = 1;
  if (!read_csv_record(source, fields, line, next_line)) return corpus;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
  for (const char* required :
       {"review_id", "product_id", "star_rating", "helpful_votes",
        "total_votes", "text"}) {
    if (!col.contains(required))
      throw CorpusError(1, required, "missing CSV column");
  }
  std::unordered_set<std::string> seen_ids;
  while (read_csv_record(source, fields, line, next_line)) {
    if (fields.size() < col.size())
      throw CorpusError(line, "", "expected " + std::to_string(col.size()) +
                                      " columns, got " +
                                      std::to_string(fields.size()));
    Review r;
    r.review_id = fields[col["review_id"]];
    r.product_id = fields[col["product_id"]];
    r.star_rating = parse_int_field(fields[col["star_rating"]], "star_rating", line);
    r.helpful_votes =
        parse_int_field(fields[col["helpful_votes"]], "helpful_votes", line);
    r.total_votes =
        parse_int_field(fields[col["total_votes"]], "total_votes", line);
    r.text = fields[col["text"]];
    if (auto it = col.find("version_group"); it != col.end()) {
      const std::string& vg = fields[it->second];
      if (!vg.empty()) r.version_group = vg;
    }
    validate_review(r, line);
    if (!seen_ids.insert(r.review_id).second)
      throw CorpusError(line, "review_id",
                        "duplicate review_id '" + r.review_id + "'");
    corpus.reviews.push_back(std::move(r));
  }
  return corpus;
}

Corpus load_jsonl(std::istream& source, std::string label) {
  Corpus corpus;
  corpus.label = std::move(label);
  std::unordered_set<std::string> seen_ids;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(source, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw CorpusError(line, "", std::string("invalid JSON: ") + e.what());
    }
    Review r = review_from_json(obj, line);
    validate_review(r, line);
    if (!seen_ids.insert(r.review_id).second)
      throw CorpusError(line, "review_id",
                        "duplicate review_id '" + r.review_id + "'");
    corpus.reviews.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace

void validate_review(const Review& review, std::size_t line) {
  if (review.review_id.empty())
    throw CorpusError(line, "review_id", "must be non-empty");
  if (review.product_id.empty())
    throw CorpusError(line, "product_id", "must be non-empty");
  if (review.star_rating < 1 || review.star_rating > 5)
    throw CorpusError(line, "star_rating",
                      "must be in [1,5], got " +
                          std::to_string(review.star_rating));
  if (review.helpful_votes < 0)
    throw CorpusError(line, "helpful_votes", "must be non-negative");
  if (review.total_votes < 0)
    throw CorpusError(line, "total_votes", "must be non-negative");
  if (review.helpful_votes > review.total_votes)
    throw CorpusError(line, "helpful_votes",
                      "helpful_votes (" + std::to_string(review.helpful_votes) +
                          ") exceeds total_votes (" +
                          std::to_string(review.total_votes) + ")");
}

Corpus load_reviews(std::istream& source, SourceFormat format,
                    std::string label) {
  return format == SourceFormat::kJsonl ? load_jsonl(source, std::move(label))
                                        : load_csv(source, std::move(label));
}

void save_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const Review& r : corpus.reviews) {
    json obj{{"review_id", r.review_id},
             {"product_id", r.product_id},
             {"star_rating", r.star_rating},
             {"helpful_votes", r.helpful_votes},
             {"total_votes", r.total_votes},
             {"text", r.text}};
    if (r.version_group) obj["version_group"] = *r.version_group;
    out << obj.dump() << '\n';
  }
}

Corpus filter_min_votes(const Corpus& corpus, int min_votes) {
  Corpus out;
  out.label = corpus.label;
  std::copy_if(corpus.reviews.begin(), corpus.reviews.end(),
               std::back_inserter(out.reviews),
               [&](const Review& r) { return r.total_votes >= min_votes; });
  return out;
}

Corpus dedup_mechanical(const Corpus& corpus) {
  // Key: (version_group, normalized text, stars) -> index of the survivor.
  std::map<std::tuple<std::string, std::string, int>, std::size_t> best;
  std::vector<bool> keep(corpus.reviews.size(), true);
  for (std::size_t i = 0; i < corpus.reviews.size(); ++i) {
    const Review& r = corpus.reviews[i];
    if (!r.version_group) continue;
    auto key = std::make_tuple(*r.version_group, normalize_text_loose(r.text),
                               r.star_rating);
    auto [it, inserted] = best.emplace(key, i);
    if (inserted) continue;
    const Review& cur = corpus.reviews[it->second];
    const bool replace =
        r.total_votes > cur.total_votes ||
        (r.total_votes == cur.total_votes && r.review_id < cur.review_id);
    if (replace) {
      keep[it->second] = false;
      it->second = i;
    } else {
      keep[i] = false;
    }
  }
  Corpus out;
  out.label = corpus.label;
  for (std::size_t i = 0; i < corpus.reviews.size(); ++i)
    if (keep[i]) out.reviews.push_back(corpus.reviews[i]);
  return out;
}

}  // namespace reviewlab
