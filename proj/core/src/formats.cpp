// Copyright 2026 The thyrex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "thyrex/formats.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "thyrex/preprocess.hpp"
#include "thyrex/utf8.hpp"

namespace thyrex {

namespace {

using OrderedJson = nlohmann::ordered_json;

std::ifstream open_input(const std::string& path, const char* who) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string(who) + ": cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path, const char* who) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(std::string(who) + ": cannot write " + path);
  return out;
}

void strip_carriage_return(std::string* line) {
  if (!line->empty() && line->back() == '\r') line->pop_back();
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

bool parse_offset(const std::string& field, std::size_t* out) {
  if (field.empty()) return false;
  for (const char c : field) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(field.c_str(), &end, 10);
  if (end != field.c_str() + field.size() || errno == ERANGE) return false;
  *out = static_cast<std::size_t>(value);
  return true;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t tab = line.find('\t', begin);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

std::vector<std::string> split_spaces(const std::string& text) {
  std::vector<std::string> parts;
  std::istringstream stream(text);
  std::string part;
  while (stream >> part) parts.push_back(part);
  return parts;
}

void record_validation(const AnnotatedDocument& doc, ReadResult* result) {
  ValidationReport report = validate_document(doc);
  if (!report.errors.empty())
    result->invalid.emplace_back(doc.id, std::move(report));
}

void require_valid(const std::vector<AnnotatedDocument>& docs, const char* who) {
  for (const AnnotatedDocument& doc : docs) {
    const ValidationReport report = validate_document(doc);
    if (!report.errors.empty())
      throw Error(std::string(who) + ": document " + doc.id +
                  " fails validation: " + report.errors.front().to_string());
  }
}

}  // namespace

ReadResult read_json(const std::string& path) {
  std::ifstream in = open_input(path, "read_json");
  ReadResult result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    strip_carriage_return(&line);
    if (is_blank(line)) continue;

    OrderedJson value;
    try {
      value = OrderedJson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("read_json: ") + e.what(), line_number);
    }

    AnnotatedDocument doc;
    try {
      if (!value.is_object()) throw Error("document is not a JSON object");
      doc.id = value.at("id").get<std::string>();
      doc.text = value.at("text").get<std::string>();
      if (value.contains("meta")) {
        for (const auto& [key, meta_value] : value.at("meta").items())
          doc.meta[key] = meta_value.get<std::string>();
      }
      for (const auto& mention_json :
           value.contains("mentions") ? value.at("mentions")
                                      : OrderedJson::array()) {
        EntityMention mention;
        mention.id = mention_json.at("id").get<std::string>();
        mention.category = parse_category(mention_json.at("category").get<std::string>());
        const std::int64_t start = mention_json.at("start").get<std::int64_t>();
        const std::int64_t end = mention_json.at("end").get<std::int64_t>();
        if (start < 0 || end < 0) throw Error("negative span offset");
        mention.span = {static_cast<std::size_t>(start), static_cast<std::size_t>(end)};
        mention.text = mention_json.at("text").get<std::string>();
        doc.mentions.push_back(std::move(mention));
      }
      for (const auto& relation_json :
           value.contains("relations") ? value.at("relations")
                                       : OrderedJson::array()) {
        Relation relation;
        relation.head_id = relation_json.at("head").get<std::string>();
        relation.tail_id = relation_json.at("tail").get<std::string>();
        relation.type = relation_json.at("type").get<std::string>();
        doc.relations.push_back(std::move(relation));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("read_json: ") + e.what(), line_number);
    } catch (const std::exception& e) {
      throw ParseError(std::string("read_json: ") + e.what(), line_number);
    }

    record_validation(doc, &result);
    result.docs.push_back(std::move(doc));
  }
  return result;
}

void write_json(const std::string& path, const std::vector<AnnotatedDocument>& docs) {
  require_valid(docs, "write_json");
  std::ofstream out = open_output(path, "write_json");
  for (const AnnotatedDocument& doc : docs) {
    OrderedJson value;
    value["id"] = doc.id;
    value["text"] = doc.text;
    OrderedJson meta = OrderedJson::object();
    for (const auto& [key, meta_value] : doc.meta) meta[key] = meta_value;
    value["meta"] = std::move(meta);
    OrderedJson mentions = OrderedJson::array();
    for (const EntityMention& mention : doc.mentions) {
      OrderedJson mention_json;
      mention_json["id"] = mention.id;
      mention_json["category"] = render_category(mention.category);
      mention_json["start"] = mention.span.start;
      mention_json["end"] = mention.span.end;
      mention_json["text"] = mention.text;
      mentions.push_back(std::move(mention_json));
    }
    value["mentions"] = std::move(mentions);
    OrderedJson relations = OrderedJson::array();
    for (const Relation& relation : doc.relations) {
      OrderedJson relation_json;
      relation_json["head"] = relation.head_id;
      relation_json["tail"] = relation.tail_id;
      relation_json["type"] = relation.type;
      relations.push_back(std::move(relation_json));
    }
    value["relations"] = std::move(relations);
    out << value.dump() << '\n';
  }
  if (!out) throw Error("write_json: write failed for " + path);
}

void write_conll(const std::string& path, const std::vector<AnnotatedDocument>& docs) {
  const TagSet tags = TagSet::full();
  std::ofstream out = open_output(path, "write_conll");
  for (const AnnotatedDocument& doc : docs) {
    const std::vector<Token> tokens = tokenize(doc.text);
    const std::vector<Sentence> sentences = segment_sentences(tokens, doc.text);
    const MentionAlignment alignment = align_mentions(doc, tokens);
    const BioEncoding encoding = spans_to_bio(doc, tokens, alignment, tags);
    out << "#doc " << doc.id << '\n';
    for (const Sentence& sentence : sentences) {
      for (std::size_t t = sentence.first; t <= sentence.last; ++t) {
        out << tokens[t].text << '\t' << tokens[t].span.start << '\t'
            << tokens[t].span.end << '\t' << tags.name(encoding.tags[t]) << '\n';
      }
      out << '\n';
    }
  }
  if (!out) throw Error("write_conll: write failed for " + path);
}

namespace {

struct ConllRow {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  TagId tag = 0;
  bool sentence_final = false;
};

void finalize_conll_doc(const std::string& doc_id, const std::vector<ConllRow>& rows,
                        const TagSet& tags, ReadResult* result) {
  std::string text;
  std::vector<Token> tokens;
  std::vector<TagId> tag_sequence;
  std::size_t position = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ConllRow& row = rows[i];
    if (row.start > position) {
      std::size_t gap = row.start - position;
      // Sentence boundaries recorded as blank lines come back as
      // newlines so re-segmentation reproduces them.
      if (i > 0 && rows[i - 1].sentence_final) {
        text += '\n';
        --gap;
      }
      text.append(gap, ' ');
    }
    text += row.text;
    position = row.end;
    Token token;
    token.text = row.text;
    token.span = {row.start, row.end};
    token.index = tokens.size();
    tokens.push_back(std::move(token));
    tag_sequence.push_back(row.tag);
  }

  AnnotatedDocument doc;
  doc.id = doc_id;
  doc.text = std::move(text);
  BioDecoding decoding = bio_to_spans(doc.text, tokens, tag_sequence, tags);
  doc.mentions = std::move(decoding.mentions);
  if (decoding.repairs > 0)
    result->warnings.push_back(doc_id + ": repaired " +
                               std::to_string(decoding.repairs) +
                               " invalid BIO transition(s)");
  record_validation(doc, result);
  result->docs.push_back(std::move(doc));
}

}  // namespace

ReadResult read_conll(const std::string& path) {
  std::ifstream in = open_input(path, "read_conll");
  const TagSet tags = TagSet::full();
  ReadResult result;

  bool have_doc = false;
  std::string doc_id;
  std::vector<ConllRow> rows;
  std::string line;
  std::size_t line_number = 0;

  const auto flush = [&]() {
    if (have_doc) finalize_conll_doc(doc_id, rows, tags, &result);
    rows.clear();
  };

  while (std::getline(in, line)) {
    ++line_number;
    strip_carriage_return(&line);
    if (line.rfind("#doc", 0) == 0) {
      flush();
      std::string id = line.substr(4);
      const std::size_t first = id.find_first_not_of(" \t");
      id = first == std::string::npos ? std::string() : id.substr(first);
      if (id.empty())
        throw ParseError("read_conll: #doc line is missing an id", line_number);
      have_doc = true;
      doc_id = id;
      continue;
    }
    if (is_blank(line)) {
      if (!rows.empty()) rows.back().sentence_final = true;
      continue;
    }
    if (!have_doc)
      throw ParseError("read_conll: token line before any #doc line", line_number);

    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 4)
      throw ParseError("read_conll: expected 4 tab-separated columns, got " +
                           std::to_string(fields.size()),
                       line_number);
    ConllRow row;
    row.text = fields[0];
    if (row.text.empty())
      throw ParseError("read_conll: empty token text", line_number);
    if (!parse_offset(fields[1], &row.start) || !parse_offset(fields[2], &row.end))
      throw ParseError("read_conll: offsets must be non-negative integers", line_number);
    if (row.end - row.start != utf8::length(row.text) || row.end <= row.start)
      throw ParseError("read_conll: span width disagrees with token text", line_number);
    if (!rows.empty() && row.start < rows.back().end)
      throw ParseError("read_conll: token offsets overlap or go backwards", line_number);
    try {
      row.tag = tags.from_name(fields[3]);
    } catch (const Error& e) {
      throw ParseError(std::string("read_conll: ") + e.what(), line_number);
    }
    rows.push_back(std::move(row));
  }
  flush();
  return result;
}

namespace {

bool is_safe_file_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
  });
}

bool is_standoff_mention_id(const std::string& id, std::size_t* number) {
  if (id.size() < 2 || id[0] != 'T' || id[1] == '0') return false;
  std::size_t value = 0;
  if (!parse_offset(id.substr(1), &value)) return false;
  *number = value;
  return true;
}

}  // namespace

void write_standoff(const std::string& dir, const std::vector<AnnotatedDocument>& docs) {
  require_valid(docs, "write_standoff");
  std::filesystem::create_directories(dir);
  for (const AnnotatedDocument& doc : docs) {
    if (!is_safe_file_id(doc.id))
      throw Error("write_standoff: document id not usable as a file name: " + doc.id);

    // Ids already shaped T<n> are kept verbatim; anything else is
    // renumbered into the first free T slots.
    std::set<std::size_t> used;
    std::map<std::string, std::string> id_map;
    for (const EntityMention& mention : doc.mentions) {
      std::size_t number = 0;
      if (is_standoff_mention_id(mention.id, &number) && used.insert(number).second)
        id_map[mention.id] = mention.id;
    }
    std::size_t next_number = 1;
    for (const EntityMention& mention : doc.mentions) {
      if (id_map.count(mention.id) != 0) continue;
      while (used.count(next_number) != 0) ++next_number;
      used.insert(next_number);
      id_map[mention.id] = "T" + std::to_string(next_number);
    }

    const std::filesystem::path base = std::filesystem::path(dir) / doc.id;
    {
      std::ofstream text_out = open_output(base.string() + ".txt", "write_standoff");
      text_out << doc.text;
      if (!text_out) throw Error("write_standoff: write failed for " + doc.id);
    }
    std::ofstream ann_out = open_output(base.string() + ".ann", "write_standoff");
    for (const auto& [key, value] : doc.meta) {
      if (key.empty() || key.find_first_of(" \t\n") != std::string::npos ||
          value.find('\n') != std::string::npos)
        throw Error("write_standoff: meta entry not representable for " + doc.id);
      ann_out << "#meta " << key << ' ' << value << '\n';
    }
    for (const EntityMention& mention : doc.mentions) {
      if (mention.text.find_first_of("\t\n") != std::string::npos)
        throw Error("write_standoff: mention text not representable for " + doc.id);
      ann_out << id_map.at(mention.id) << '\t' << render_category(mention.category)
              << ' ' << mention.span.start << ' ' << mention.span.end << '\t'
              << mention.text << '\n';
    }
    std::size_t relation_number = 1;
    for (const Relation& relation : doc.relations) {
      ann_out << "R" << relation_number++ << '\t' << relation.type
              << " Arg1:" << id_map.at(relation.head_id)
              << " Arg2:" << id_map.at(relation.tail_id) << '\n';
    }
    if (!ann_out) throw Error("write_standoff: write failed for " + doc.id);
  }
}

ReadResult read_standoff(const std::string& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error("read_standoff: not a directory: " + dir);

  std::vector<std::filesystem::path> text_paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      text_paths.push_back(entry.path());
  }
  std::sort(text_paths.begin(), text_paths.end());

  ReadResult result;
  for (const std::filesystem::path& text_path : text_paths) {
    const std::string doc_id = text_path.stem().string();
    AnnotatedDocument doc;
    doc.id = doc_id;
    {
      std::ifstream text_in = open_input(text_path.string(), "read_standoff");
      std::ostringstream buffer;
      buffer << text_in.rdbuf();
      doc.text = buffer.str();
    }

    std::filesystem::path ann_path = text_path;
    ann_path.replace_extension(".ann");
    if (!std::filesystem::is_regular_file(ann_path))
      throw Error("read_standoff: missing annotation file for " + doc_id);

    std::ifstream ann_in = open_input(ann_path.string(), "read_standoff");
    std::string line;
    std::size_t line_number = 0;
    std::set<std::string> mention_ids;
    while (std::getline(ann_in, line)) {
      ++line_number;
      strip_carriage_return(&line);
      if (is_blank(line)) continue;
      if (line[0] == '#') {
        if (line.rfind("#meta ", 0) == 0) {
          const std::string rest = line.substr(6);
          const std::size_t space = rest.find(' ');
          if (space == std::string::npos || space == 0)
            throw ParseError("read_standoff: #meta line needs a key and a value",
                             line_number);
          doc.meta[rest.substr(0, space)] = rest.substr(space + 1);
        }
        continue;
      }
      if (line[0] == 'T') {
        const std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 3)
          throw ParseError("read_standoff: mention line needs 3 tab-separated fields",
                           line_number);
        const std::vector<std::string> middle = split_spaces(fields[1]);
        if (middle.size() != 3)
          throw ParseError("read_standoff: mention line needs category and two offsets",
                           line_number);
        EntityMention mention;
        mention.id = fields[0];
        try {
          mention.category = parse_category(middle[0]);
        } catch (const Error& e) {
          throw ParseError(std::string("read_standoff: ") + e.what(), line_number);
        }
        if (!parse_offset(middle[1], &mention.span.start) ||
            !parse_offset(middle[2], &mention.span.end))
          throw ParseError("read_standoff: offsets must be non-negative integers",
                           line_number);
        mention.text = fields[2];
        if (!mention_ids.insert(mention.id).second)
          throw ParseError("read_standoff: duplicate mention id " + mention.id,
                           line_number);
        doc.mentions.push_back(std::move(mention));
        continue;
      }
      if (line[0] == 'R') {
        const std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 2)
          throw ParseError("read_standoff: relation line needs 2 tab-separated fields",
                           line_number);
        const std::vector<std::string> parts = split_spaces(fields[1]);
        if (parts.size() != 3 || parts[1].rfind("Arg1:", 0) != 0 ||
            parts[2].rfind("Arg2:", 0) != 0)
          throw ParseError("read_standoff: relation line needs TYPE Arg1: Arg2:",
                           line_number);
        Relation relation;
        relation.type = parts[0];
        relation.head_id = parts[1].substr(5);
        relation.tail_id = parts[2].substr(5);
        doc.relations.push_back(std::move(relation));
        continue;
      }
      throw ParseError("read_standoff: unrecognized annotation line", line_number);
    }

    // Reference checks run after the whole file is parsed; annotation
    // tools do not guarantee T lines precede R lines.
    for (const Relation& relation : doc.relations) {
      for (const std::string& ref : {relation.head_id, relation.tail_id}) {
        if (mention_ids.count(ref) == 0)
          throw Error("read_standoff: " + doc_id + ".ann references missing mention " +
                      ref);
      }
    }

    record_validation(doc, &result);
    result.docs.push_back(std::move(doc));
  }
  return result;
}

ReadResult import_predictions(const std::string& path, const std::string& format) {
  if (format == "json") return read_json(path);
  if (format == "conll") return read_conll(path);
  throw Error("import_predictions: unknown format " + format);
}

}  // namespace thyrex
