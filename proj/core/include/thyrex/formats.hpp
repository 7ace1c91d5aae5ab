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

#ifndef THYREX_FORMATS_HPP_
#define THYREX_FORMATS_HPP_

#include <string>
#include <vector>

#include "thyrex/schema.hpp"

namespace thyrex {

// Result of reading an annotation file: parsed documents plus the
// validation reports of any documents that failed validation. Documents
// with validation errors still appear in `docs`; callers decide whether
// to reject them.
struct ReadResult {
  std::vector<AnnotatedDocument> docs;
  // One entry per invalid document: (document id, report).
  std::vector<std::pair<std::string, ValidationReport>> invalid;
  std::vector<std::string> warnings;
};

// JSON-lines canonical format: one document object per line with keys
// id, text, meta, mentions[{id,category,start,end,text}],
// relations[{head,tail,type}]. Blank lines are skipped.
//
// read_json throws ParseError (with the 1-based line number) on
// malformed JSON or wrong field types; write_json throws Error if any
// document fails validation with errors.
ReadResult read_json(const std::string& path);
void write_json(const std::string& path, const std::vector<AnnotatedDocument>& docs);

// CoNLL-style token view: `#doc <id>` per document, then one
// `token\tstart\tend\ttag` line per token with a blank line between
// sentences. Offsets are codepoint offsets into the original text.
//
// Reading reconstructs document text from tokens and offsets (gap
// bytes become spaces; the first gap character after a sentence-final
// token becomes a newline) and decodes tags with BIO repair; repairs
// are reported in ReadResult::warnings. Errors carry line numbers.
ReadResult read_conll(const std::string& path);
void write_conll(const std::string& path, const std::vector<AnnotatedDocument>& docs);

// Standoff directory: `<id>.txt` holds the document text, `<id>.ann`
// holds one line per annotation: `T<n>\t<CATEGORY> <start> <end>\t<text>`
// for mentions, `R<n>\t<TYPE> Arg1:T<i> Arg2:T<j>` for relations, and
// `#meta <key> <value>` comment lines carrying document metadata.
// Mention ids of the form T<n> are written verbatim; other ids are
// renumbered, which loses them (the JSON format is the lossless one in
// that case).
//
// read_standoff scans `*.txt` in name order. A relation referencing a
// missing T id throws Error naming the id; a mention whose recorded
// text disagrees with the text file yields a validation violation for
// that document.
ReadResult read_standoff(const std::string& dir);
void write_standoff(const std::string& dir, const std::vector<AnnotatedDocument>& docs);

// Bridge for scoring externally produced predictions. `format` is
// "json" or "conll". Validation violations are reported in the result,
// not thrown.
ReadResult import_predictions(const std::string& path, const std::string& format);

}  // namespace thyrex

#endif  // THYREX_FORMATS_HPP_
