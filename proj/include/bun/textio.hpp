#pragma once

#include <vector>

#include "bun/entities.hpp"

namespace bun {

// Lexer shared by the predicate, scenario, snapshot and export formats.
//
// Token classes:
//   words   identifiers/paths ([A-Za-z0-9_.$*^], may start with a digit for
//           numbers; a leading '-' followed by a digit starts a number),
//           comparison operators (runs of <>=!)
//   strings double-quoted with \" \\ \n \t \r escapes
//   puncts  { } [ ] ( ) : , | and the arrow ->
// A '#' outside a string starts a comment running to end of input line.
struct Token {
    enum class Type { Word, String, Punct, End };
    Type type = Type::End;
    std::string text;
    int line = 1;
    int col = 1;
};

class TokenStream {
public:
    explicit TokenStream(std::string_view text, std::string origin = "");

    const Token& peek(std::size_t ahead = 0);
    Token next();
    bool at_end();

    bool accept_punct(std::string_view p);
    void expect_punct(std::string_view p);
    bool accept_word(std::string_view w);
    std::string expect_word(std::string_view what = "identifier");
    std::int64_t expect_int(std::string_view what = "integer");

    [[noreturn]] void fail(const std::string& msg) const;
    [[noreturn]] void fail_at(const Token& tok, const std::string& msg) const;

private:
    void lex_all(std::string_view text);

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::string origin_;
};

// Literal values. Words are interpreted as numbers or booleans; strings stay
// strings. Bare words that are neither are rejected here (names are parsed
// with expect_word by the callers that want them).
Literal parse_literal(TokenStream& ts);
bool looks_like_literal(const Token& tok);

// { key: value, ... }   keys are bare paths
AttrMap parse_attr_map(TokenStream& ts);
std::string render_attr_map(const AttrMap& m);

// { name, name, ... }
NameSet parse_name_set(TokenStream& ts);
std::string render_name_set(const NameSet& s);

// [ name, name, ... ]
std::vector<std::string> parse_name_list(TokenStream& ts);
std::string render_name_list(const std::vector<std::string>& v);

// { path:(old->new), path:(->new), ... }
DeltaMap parse_delta_map(TokenStream& ts);
std::string render_delta_map(const DeltaMap& d);

// Entity lines, shared verbatim between scenario sections and snapshots:
//   subject <id> roles {..} capabilities {..} attrs {..} goals [..]
//   object <id> class <name> attrs {..} state {..} affords {..} tags {..}
//   model <id> kind <threshold|linear> params {path: "...", bound: <num>, dir: "<cmp>", window: <n>}
// Trailing groups may be omitted when empty; rendering always emits them all.
std::string render_subject_line(const SubjectRecord& s);
SubjectRecord parse_subject_line(TokenStream& ts);
std::string render_object_line(const ObjectRecord& o);
ObjectRecord parse_object_line(TokenStream& ts);
std::string render_model_line(const ForecastModel& m);
ForecastModel parse_model_line(TokenStream& ts);

// Behavior log line, canonical field order:
//   <id> <time> <subject> <operation> <object> <outcome> <depth> <caused_by|->
//   <decision> delta {..} args {..} ctx {..} ctags {..}
// <decision> is "allow" for applied/failed records and the deny reason
// otherwise. Parsed records carry a summary-level verdict only.
std::string render_behavior_line(const BehaviorRecord& rec);
BehaviorRecord parse_behavior_line(TokenStream& ts);

// Event feed line:
//   <id> <time> <kind> <entity> <cause|-> tags {..} delta {..}
std::string render_event_line(const EventRecord& ev);
EventRecord parse_event_line(TokenStream& ts);

// Splits text into lines with '#' comments stripped; keeps 1-based numbering.
std::vector<std::pair<int, std::string>> nonblank_lines(std::string_view text);

}  // namespace bun
