#include "opetri/uwd_dsl.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace opetri {

namespace {

enum class Tok { Ident, LParen, RParen, LBrace, RBrace, Comma, Semi, Newline, End };

struct Token {
    Tok kind;
    std::string text;
    int line;
    int column;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        int paren_depth = 0;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            if (c == '\n') {
                // Newlines only matter as separators outside parentheses.
                if (paren_depth == 0) out.push_back({Tok::Newline, "\n", line_, col_});
                advance();
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const int l = line_, col = col_;
                std::string id;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                              src_[pos_] == '_')) {
                    id.push_back(src_[pos_]);
                    advance();
                }
                out.push_back({Tok::Ident, std::move(id), l, col});
                continue;
            }
            const int l = line_, col = col_;
            switch (c) {
                case '(': ++paren_depth; out.push_back({Tok::LParen, "(", l, col}); break;
                case ')':
                    if (paren_depth > 0) --paren_depth;
                    out.push_back({Tok::RParen, ")", l, col});
                    break;
                case '{': out.push_back({Tok::LBrace, "{", l, col}); break;
                case '}': out.push_back({Tok::RBrace, "}", l, col}); break;
                case ',': out.push_back({Tok::Comma, ",", l, col}); break;
                case ';': out.push_back({Tok::Semi, ";", l, col}); break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", l, col);
            }
            advance();
        }
        out.push_back({Tok::End, "", line_, col_});
        return out;
    }

  private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct BoxStmt {
    std::string name;
    std::vector<std::string> vars;
    Token at;
};

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    UwdParse run() {
        skip_newlines();
        expect_keyword("uwd");
        const Token name_tok = expect(Tok::Ident, "diagram name");
        head_name_ = name_tok.text;
        expect(Tok::LParen, "'('");
        head_vars_ = var_list();
        expect(Tok::LBrace, "'{'");
        while (true) {
            skip_separators();
            if (peek().kind == Tok::RBrace) break;
            if (peek().kind == Tok::End)
                throw ParseError("unexpected end of input, expected '}'", peek().line, peek().column);
            statement();
            const Tok k = peek().kind;
            if (k != Tok::Semi && k != Tok::Newline && k != Tok::RBrace)
                throw ParseError("expected ';', newline, or '}' after entry", peek().line,
                                 peek().column);
        }
        expect(Tok::RBrace, "'}'");
        skip_newlines();
        if (peek().kind != Tok::End)
            throw ParseError("trailing input after '}'", peek().line, peek().column);
        return build();
    }

  private:
    const Token& peek() const { return toks_[pos_]; }
    Token take() { return toks_[pos_++]; }

    void skip_newlines() {
        while (peek().kind == Tok::Newline) ++pos_;
    }
    void skip_separators() {
        while (peek().kind == Tok::Newline || peek().kind == Tok::Semi) ++pos_;
    }

    Token expect(Tok kind, const char* what) {
        skip_newlines_unless(kind);
        if (peek().kind != kind)
            throw ParseError(std::string("expected ") + what, peek().line, peek().column);
        return take();
    }

    // Newlines are insignificant everywhere except where they terminate a
    // body entry, so most expectations skip them first.
    void skip_newlines_unless(Tok kind) {
        if (kind != Tok::Newline) skip_newlines();
    }

    void expect_keyword(const char* kw) {
        const Token t = expect(Tok::Ident, "keyword");
        if (t.text != kw)
            throw ParseError(std::string("expected keyword '") + kw + "', got '" + t.text + "'",
                             t.line, t.column);
    }

    std::vector<std::string> var_list() {
        std::vector<std::string> vars;
        skip_newlines();
        if (peek().kind == Tok::RParen) {
            take();
            return vars;
        }
        while (true) {
            vars.push_back(expect(Tok::Ident, "variable name").text);
            skip_newlines();
            if (peek().kind == Tok::Comma) {
                take();
                continue;
            }
            expect(Tok::RParen, "')' or ','");
            return vars;
        }
    }

    void statement() {
        const Token head = expect(Tok::Ident, "box or junction declaration");
        if (head.text == "junction") {
            const Token j = expect(Tok::Ident, "junction name");
            declared_.push_back(j.text);
            expect(Tok::Semi, "';' after junction declaration");
            return;
        }
        expect(Tok::LParen, "'(' after box name");
        BoxStmt b;
        b.name = head.text;
        b.at = head;
        b.vars = var_list();
        boxes_.push_back(std::move(b));
    }

    UwdParse build() {
        UwdParse result;
        result.name = head_name_;
        std::map<std::string, int> index;
        auto junction_of = [&](const std::string& var) {
            auto [it, fresh] = index.emplace(var, static_cast<int>(result.uwd.junctions.size()));
            if (fresh) result.uwd.junctions.push_back({var});
            return it->second;
        };
        for (const auto& d : declared_) junction_of(d);
        for (const auto& v : head_vars_) result.uwd.outer_ports.push_back(junction_of(v));
        for (const auto& b : boxes_) {
            for (const auto& prev : result.uwd.boxes)
                if (prev.name == b.name)
                    throw ParseError("duplicate box name \"" + b.name + "\"", b.at.line, b.at.column);
            BoxRec rec;
            rec.name = b.name;
            for (const auto& v : b.vars) rec.ports.push_back(junction_of(v));
            result.uwd.boxes.push_back(std::move(rec));
        }
        std::set<std::string> used;
        for (const auto& b : boxes_)
            for (const auto& v : b.vars) used.insert(v);
        for (const auto& v : head_vars_)
            if (!used.count(v))
                result.warnings.push_back("head variable \"" + v +
                                          "\" is not used by any box; it stays an unwired junction");
        return result;
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    std::string head_name_;
    std::vector<std::string> head_vars_;
    std::vector<std::string> declared_;
    std::vector<BoxStmt> boxes_;
};

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

}  // namespace

UwdParse parse_uwd(const std::string& source) {
    Lexer lex(source);
    Parser parser(lex.run());
    return parser.run();
}

std::string print_uwd(const UWD& u, const std::string& name) {
    {
        auto v = validate_uwd(u);
        if (!v.empty()) throw Error("print_uwd: invalid diagram: " + v.front());
    }
    if (!is_identifier(name)) throw Error("print_uwd: diagram name is not an identifier");
    for (const auto& j : u.junctions)
        if (!is_identifier(j.name))
            throw Error("print_uwd: junction name \"" + j.name + "\" is not an identifier");
    for (const auto& b : u.boxes)
        if (!is_identifier(b.name) || b.name == "junction" || b.name == "uwd")
            throw Error("print_uwd: box name \"" + b.name + "\" is not printable");

    // The compact form omits junction declarations; it reparses to the same
    // diagram only if first occurrences already visit junctions in order.
    std::vector<int> first_occurrence;
    std::set<int> seen;
    auto visit = [&](int j) {
        if (seen.insert(j).second) first_occurrence.push_back(j);
    };
    for (int j : u.outer_ports) visit(j);
    for (const auto& b : u.boxes)
        for (int j : b.ports) visit(j);
    bool compact = first_occurrence.size() == u.junctions.size();
    for (size_t i = 0; compact && i < first_occurrence.size(); ++i)
        if (first_occurrence[i] != static_cast<int>(i)) compact = false;

    std::ostringstream os;
    os << "uwd " << name << "(";
    for (size_t i = 0; i < u.outer_ports.size(); ++i) {
        if (i) os << ", ";
        os << u.junctions[static_cast<size_t>(u.outer_ports[i])].name;
    }
    os << ")";
    if (compact && u.boxes.empty()) {
        os << " {}";
        return os.str();
    }
    os << " {\n";
    if (!compact)
        for (const auto& j : u.junctions) os << "  junction " << j.name << ";\n";
    for (const auto& b : u.boxes) {
        os << "  " << b.name << "(";
        for (size_t p = 0; p < b.ports.size(); ++p) {
            if (p) os << ", ";
            os << u.junctions[static_cast<size_t>(b.ports[p])].name;
        }
        os << ");\n";
    }
    os << "}";
    return os.str();
}

}  // namespace opetri
