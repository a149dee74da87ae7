#include "bun/textio.hpp"

#include <algorithm>
#include <cctype>

namespace bun {

namespace {

bool word_head(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '*' ||
           c == '^' || c == '.';
}

bool word_tail(char c) { return word_head(c); }

bool cmp_char(char c) { return c == '<' || c == '>' || c == '=' || c == '!'; }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

TokenStream::TokenStream(std::string_view text, std::string origin) : origin_(std::move(origin)) {
    lex_all(text);
}

void TokenStream::lex_all(std::string_view text) {
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (text[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.col = col;
        if (c == '"') {
            tok.type = Token::Type::String;
            advance(1);
            std::string out;
            bool closed = false;
            while (i < text.size()) {
                char d = text[i];
                if (d == '"') {
                    advance(1);
                    closed = true;
                    break;
                }
                if (d == '\n') break;
                if (d == '\\' && i + 1 < text.size()) {
                    char e = text[i + 1];
                    switch (e) {
                        case '"': out.push_back('"'); break;
                        case '\\': out.push_back('\\'); break;
                        case 'n': out.push_back('\n'); break;
                        case 't': out.push_back('\t'); break;
                        case 'r': out.push_back('\r'); break;
                        default: out.push_back(e);
                    }
                    advance(2);
                    continue;
                }
                out.push_back(d);
                advance(1);
            }
            if (!closed) {
                tok.type = Token::Type::End;
                tokens_.push_back(tok);
                fail_at(tok, "unterminated string");
            }
            tok.text = std::move(out);
            tokens_.push_back(std::move(tok));
            continue;
        }
        if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
            tok.type = Token::Type::Punct;
            tok.text = "->";
            advance(2);
            tokens_.push_back(std::move(tok));
            continue;
        }
        if (c == '-' && i + 1 < text.size() && is_digit(text[i + 1])) {
            tok.type = Token::Type::Word;
            std::size_t j = i + 1;
            while (j < text.size() && (is_digit(text[j]) || text[j] == '.')) ++j;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
            tokens_.push_back(std::move(tok));
            continue;
        }
        if (c == '-') {
            tok.type = Token::Type::Word;
            tok.text = "-";
            advance(1);
            tokens_.push_back(std::move(tok));
            continue;
        }
        if (cmp_char(c)) {
            std::size_t j = i;
            while (j < text.size() && cmp_char(text[j])) ++j;
            tok.type = Token::Type::Word;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
            tokens_.push_back(std::move(tok));
            continue;
        }
        if (c == '{' || c == '}' || c == '[' || c == ']' || c == '(' || c == ')' || c == ':' ||
            c == ',' || c == '|') {
            tok.type = Token::Type::Punct;
            tok.text = std::string(1, c);
            advance(1);
            tokens_.push_back(std::move(tok));
            continue;
        }
        if (word_head(c)) {
            std::size_t j = i;
            while (j < text.size() && word_tail(text[j])) ++j;
            tok.type = Token::Type::Word;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
            tokens_.push_back(std::move(tok));
            continue;
        }
        tok.type = Token::Type::End;
        tokens_.push_back(tok);
        fail_at(tok, std::string("unexpected character '") + c + "'");
    }
    Token end;
    end.type = Token::Type::End;
    end.line = line;
    end.col = col;
    tokens_.push_back(end);
}

const Token& TokenStream::peek(std::size_t ahead) {
    std::size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[idx];
}

Token TokenStream::next() {
    const Token& t = peek();
    if (t.type != Token::Type::End) ++pos_;
    return t;
}

bool TokenStream::at_end() { return peek().type == Token::Type::End; }

bool TokenStream::accept_punct(std::string_view p) {
    const Token& t = peek();
    if (t.type == Token::Type::Punct && t.text == p) {
        ++pos_;
        return true;
    }
    return false;
}

void TokenStream::expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail_at(peek(), "expected '" + std::string(p) + "'");
}

bool TokenStream::accept_word(std::string_view w) {
    const Token& t = peek();
    if (t.type == Token::Type::Word && t.text == w) {
        ++pos_;
        return true;
    }
    return false;
}

std::string TokenStream::expect_word(std::string_view what) {
    const Token& t = peek();
    if (t.type != Token::Type::Word) fail_at(t, "expected " + std::string(what));
    ++pos_;
    return t.text;
}

std::int64_t TokenStream::expect_int(std::string_view what) {
    const Token& t = peek();
    if (t.type != Token::Type::Word) fail_at(t, "expected " + std::string(what));
    try {
        std::size_t used = 0;
        std::int64_t v = std::stoll(t.text, &used);
        if (used != t.text.size()) throw std::invalid_argument("trailing");
        ++pos_;
        return v;
    } catch (const std::exception&) {
        fail_at(t, "expected " + std::string(what) + ", got '" + t.text + "'");
    }
}

void TokenStream::fail(const std::string& msg) const {
    const Token& t = tokens_[std::min(pos_, tokens_.size() - 1)];
    fail_at(t, msg);
}

void TokenStream::fail_at(const Token& tok, const std::string& msg) const {
    std::string where = origin_.empty() ? "" : origin_ + ":";
    throw Error(where + std::to_string(tok.line) + ":" + std::to_string(tok.col) + ": " + msg);
}

bool looks_like_literal(const Token& tok) {
    if (tok.type == Token::Type::String) return true;
    if (tok.type != Token::Type::Word) return false;
    if (tok.text == "true" || tok.text == "false") return true;
    char c = tok.text[0];
    return is_digit(c) || (c == '-' && tok.text.size() > 1);
}

Literal parse_literal(TokenStream& ts) {
    Token t = ts.peek();
    if (t.type == Token::Type::String) {
        ts.next();
        return Literal::of_string(t.text);
    }
    if (t.type != Token::Type::Word) ts.fail_at(t, "expected a literal value");
    if (t.text == "true") {
        ts.next();
        return Literal::of_bool(true);
    }
    if (t.text == "false") {
        ts.next();
        return Literal::of_bool(false);
    }
    char c = t.text[0];
    if (is_digit(c) || c == '-') {
        ts.next();
        try {
            if (t.text.find('.') != std::string::npos)
                return Literal::of_decimal(Decimal::parse(t.text));
            std::size_t used = 0;
            std::int64_t v = std::stoll(t.text, &used);
            if (used != t.text.size()) throw Error("trailing characters");
            return Literal::of_int(v);
        } catch (const std::exception& e) {
            ts.fail_at(t, std::string("bad number: ") + e.what());
        }
    }
    ts.fail_at(t, "expected a literal value, got '" + t.text + "'");
}

AttrMap parse_attr_map(TokenStream& ts) {
    AttrMap out;
    ts.expect_punct("{");
    if (ts.accept_punct("}")) return out;
    while (true) {
        std::string key = ts.expect_word("attribute path");
        ts.expect_punct(":");
        out[key] = parse_literal(ts);
        if (ts.accept_punct(",")) continue;
        ts.expect_punct("}");
        break;
    }
    return out;
}

std::string render_attr_map(const AttrMap& m) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : m) {
        if (!first) out += ",";
        first = false;
        out += k + ":" + v.str();
    }
    out += "}";
    return out;
}

NameSet parse_name_set(TokenStream& ts) {
    NameSet out;
    ts.expect_punct("{");
    if (ts.accept_punct("}")) return out;
    while (true) {
        out.insert(ts.expect_word("name"));
        if (ts.accept_punct(",")) continue;
        ts.expect_punct("}");
        break;
    }
    return out;
}

std::string render_name_set(const NameSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& n : s) {
        if (!first) out += ",";
        first = false;
        out += n;
    }
    out += "}";
    return out;
}

std::vector<std::string> parse_name_list(TokenStream& ts) {
    std::vector<std::string> out;
    ts.expect_punct("[");
    if (ts.accept_punct("]")) return out;
    while (true) {
        out.push_back(ts.expect_word("name"));
        if (ts.accept_punct(",")) continue;
        ts.expect_punct("]");
        break;
    }
    return out;
}

std::string render_name_list(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    out += "]";
    return out;
}

DeltaMap parse_delta_map(TokenStream& ts) {
    DeltaMap out;
    ts.expect_punct("{");
    if (ts.accept_punct("}")) return out;
    while (true) {
        std::string key = ts.expect_word("path");
        ts.expect_punct(":");
        ts.expect_punct("(");
        std::optional<Literal> oldv;
        if (!ts.accept_punct("->")) {
            oldv = parse_literal(ts);
            ts.expect_punct("->");
        }
        Literal newv = parse_literal(ts);
        ts.expect_punct(")");
        out[key] = {oldv, newv};
        if (ts.accept_punct(",")) continue;
        ts.expect_punct("}");
        break;
    }
    return out;
}

std::string render_delta_map(const DeltaMap& d) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : d) {
        if (!first) out += ",";
        first = false;
        out += k + ":(";
        if (v.first) out += v.first->str();
        out += "->" + v.second.str() + ")";
    }
    out += "}";
    return out;
}

std::string render_subject_line(const SubjectRecord& s) {
    return "subject " + s.id + " roles " + render_name_set(s.roles) + " capabilities " +
           render_name_set(s.capabilities) + " attrs " + render_attr_map(s.attributes) +
           " goals " + render_name_list(s.goals);
}

SubjectRecord parse_subject_line(TokenStream& ts) {
    SubjectRecord s;
    if (!ts.accept_word("subject")) ts.fail("expected 'subject'");
    s.id = ts.expect_word("subject id");
    while (!ts.at_end()) {
        if (ts.accept_word("roles")) {
            s.roles = parse_name_set(ts);
        } else if (ts.accept_word("capabilities")) {
            s.capabilities = parse_name_set(ts);
        } else if (ts.accept_word("attrs")) {
            s.attributes = parse_attr_map(ts);
        } else if (ts.accept_word("goals")) {
            s.goals = parse_name_list(ts);
        } else {
            ts.fail("unknown subject field '" + ts.peek().text + "'");
        }
    }
    return s;
}

std::string render_object_line(const ObjectRecord& o) {
    return "object " + o.id + " class " + o.object_class + " attrs " +
           render_attr_map(o.attributes) + " state " + render_attr_map(o.state) + " affords " +
           render_name_set(o.affordances) + " tags " + render_name_set(o.tags);
}

ObjectRecord parse_object_line(TokenStream& ts) {
    ObjectRecord o;
    if (!ts.accept_word("object")) ts.fail("expected 'object'");
    o.id = ts.expect_word("object id");
    if (!ts.accept_word("class")) ts.fail("expected 'class'");
    o.object_class = ts.expect_word("class name");
    while (!ts.at_end()) {
        if (ts.accept_word("attrs")) {
            o.attributes = parse_attr_map(ts);
        } else if (ts.accept_word("state")) {
            o.state = parse_attr_map(ts);
        } else if (ts.accept_word("affords")) {
            o.affordances = parse_name_set(ts);
        } else if (ts.accept_word("tags")) {
            o.tags = parse_name_set(ts);
        } else {
            ts.fail("unknown object field '" + ts.peek().text + "'");
        }
    }
    return o;
}

std::string render_model_line(const ForecastModel& m) {
    AttrMap params;
    params["path"] = Literal::of_string(m.path);
    params["bound"] = Literal::of_decimal(m.bound);
    params["dir"] = Literal::of_string(to_string(m.direction));
    if (m.kind == ModelKind::LinearExtrapolation)
        params["window"] = Literal::of_int(m.window);
    return "model " + m.id + " kind " + std::string(to_string(m.kind)) + " params " +
           render_attr_map(params);
}

ForecastModel parse_model_line(TokenStream& ts) {
    ForecastModel m;
    if (!ts.accept_word("model")) ts.fail("expected 'model'");
    m.id = ts.expect_word("model id");
    if (!ts.accept_word("kind")) ts.fail("expected 'kind'");
    std::string kind = ts.expect_word("model kind");
    if (kind == "threshold") {
        m.kind = ModelKind::Threshold;
    } else if (kind == "linear") {
        m.kind = ModelKind::LinearExtrapolation;
    } else {
        ts.fail("unknown model kind '" + kind + "'");
    }
    if (!ts.accept_word("params")) ts.fail("expected 'params'");
    AttrMap params = parse_attr_map(ts);
    auto get = [&](const char* key) -> const Literal& {
        auto it = params.find(key);
        if (it == params.end()) ts.fail(std::string("model ") + m.id + " missing param '" + key + "'");
        return it->second;
    };
    m.path = get("path").as_string();
    m.bound = get("bound").numeric();
    std::string dir = get("dir").as_string();
    if (dir == "<") m.direction = CmpOp::Lt;
    else if (dir == "<=") m.direction = CmpOp::Le;
    else if (dir == ">") m.direction = CmpOp::Gt;
    else if (dir == ">=") m.direction = CmpOp::Ge;
    else ts.fail("model dir must be one of < <= > >=");
    if (m.kind == ModelKind::LinearExtrapolation) {
        m.window = static_cast<int>(get("window").as_int());
    }
    return m;
}

std::string render_behavior_line(const BehaviorRecord& rec) {
    std::string decision = rec.deny_reason.empty() ? "allow" : rec.deny_reason;
    std::string caused = rec.caused_by ? std::to_string(*rec.caused_by) : "-";
    return std::to_string(rec.id) + " " + std::to_string(rec.logical_time) + " " +
           rec.subject_id + " " + rec.operation + " " + rec.object_id + " " +
           to_string(rec.outcome) + " " + std::to_string(rec.cascade_depth) + " " + caused + " " +
           decision + " delta " + render_delta_map(rec.state_delta) + " args " +
           render_attr_map(rec.args) + " ctx " + render_attr_map(rec.context.values) + " ctags " +
           render_name_set(rec.context.tags);
}

BehaviorRecord parse_behavior_line(TokenStream& ts) {
    BehaviorRecord rec;
    rec.id = ts.expect_int("behavior id");
    rec.logical_time = ts.expect_int("logical time");
    rec.subject_id = ts.expect_word("subject id");
    rec.operation = ts.expect_word("operation");
    rec.object_id = ts.expect_word("object id");
    std::string outcome = ts.expect_word("outcome");
    auto oc = outcome_from(outcome);
    if (!oc) ts.fail("unknown outcome '" + outcome + "'");
    rec.outcome = *oc;
    rec.cascade_depth = static_cast<int>(ts.expect_int("cascade depth"));
    if (ts.peek().text == "-") {
        ts.next();
    } else {
        rec.caused_by = ts.expect_int("caused_by");
    }
    std::string decision = ts.expect_word("decision");
    while (ts.accept_punct(":")) decision += ":" + ts.expect_word("decision part");
    if (decision != "allow") {
        rec.deny_reason = decision;
        // reconstruct a summary-level verdict
        if (decision.rfind("gate:", 0) == 0) {
            rec.verdict.allow = false;
            rec.verdict.gate_passed = false;
            rec.verdict.gate_reason = decision;
        } else if (decision == "mutex") {
            rec.verdict.allow = true;
            rec.verdict.gate_passed = true;
        } else {
            rec.verdict.allow = false;
            rec.verdict.gate_passed = true;
        }
    } else {
        rec.verdict.allow = true;
        rec.verdict.gate_passed = true;
    }
    if (!ts.accept_word("delta")) ts.fail("expected 'delta'");
    rec.state_delta = parse_delta_map(ts);
    if (!ts.accept_word("args")) ts.fail("expected 'args'");
    rec.args = parse_attr_map(ts);
    if (!ts.accept_word("ctx")) ts.fail("expected 'ctx'");
    rec.context.values = parse_attr_map(ts);
    if (!ts.accept_word("ctags")) ts.fail("expected 'ctags'");
    rec.context.tags = parse_name_set(ts);
    return rec;
}

std::string render_event_line(const EventRecord& ev) {
    std::string cause = ev.cause_behavior_id ? std::to_string(*ev.cause_behavior_id) : "-";
    return std::to_string(ev.id) + " " + std::to_string(ev.logical_time) + " " +
           to_string(ev.kind) + " " + ev.entity_id + " " + cause + " tags " +
           render_name_set(ev.tags) + " delta " + render_delta_map(ev.delta);
}

EventRecord parse_event_line(TokenStream& ts) {
    EventRecord ev;
    ev.id = ts.expect_int("event id");
    ev.logical_time = ts.expect_int("logical time");
    std::string kind = ts.expect_word("event kind");
    if (kind == "object_changed") ev.kind = EventKind::ObjectChanged;
    else if (kind == "behavior_recorded") ev.kind = EventKind::BehaviorRecorded;
    else if (kind == "external_signal") ev.kind = EventKind::ExternalSignal;
    else ts.fail("unknown event kind '" + kind + "'");
    ev.entity_id = ts.expect_word("entity id");
    if (ts.peek().text == "-") {
        ts.next();
    } else {
        ev.cause_behavior_id = ts.expect_int("cause behavior id");
    }
    if (!ts.accept_word("tags")) ts.fail("expected 'tags'");
    ev.tags = parse_name_set(ts);
    if (!ts.accept_word("delta")) ts.fail("expected 'delta'");
    ev.delta = parse_delta_map(ts);
    return ev;
}

std::vector<std::pair<int, std::string>> nonblank_lines(std::string_view text) {
    std::vector<std::pair<int, std::string>> out;
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view raw =
            text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        ++lineno;
        // strip comments outside strings
        std::string line;
        bool in_str = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            char c = raw[i];
            if (c == '"') {
                std::size_t backslashes = 0;
                while (backslashes < i && raw[i - 1 - backslashes] == '\\') ++backslashes;
                if (backslashes % 2 == 0) in_str = !in_str;
            }
            if (c == '#' && !in_str) break;
            line.push_back(c);
        }
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first != std::string::npos) out.emplace_back(lineno, line.substr(first));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace bun
