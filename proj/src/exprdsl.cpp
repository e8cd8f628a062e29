#include "spraylab/exprdsl.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spraylab {

Expr::Expr(std::shared_ptr<const ExprNode> root, std::string source, int dim, std::size_t base_offset)
    : root_(std::move(root)), source_(std::move(source)), dim_(dim), base_offset_(base_offset) {}

namespace {

bool node_uses_y(const ExprNode& n) {
    if (n.kind == NodeKind::Variable && n.is_y) return true;
    for (const auto& c : n.children) {
        if (node_uses_y(c)) return true;
    }
    return false;
}

struct FunctionEntry {
    const char* name;
    Function fn;
};

constexpr FunctionEntry kFunctions[] = {
    {"sqrt", Function::Sqrt}, {"sin", Function::Sin}, {"cos", Function::Cos},
    {"exp", Function::Exp},   {"log", Function::Log}, {"abs", Function::Abs},
};

class Parser {
public:
    Parser(std::string_view src, int n, const ParseOptions& opt) : src_(src), n_(n), opt_(opt) {}

    ExprNode parse() {
        skip_ws();
        if (at_end()) error("empty expression", pos_, pos_);
        ExprNode e = expr();
        skip_ws();
        if (!at_end()) error(std::string("unexpected '") + src_[pos_] + "'", pos_, pos_ + 1);
        return e;
    }

    SourceSpan span(std::size_t start, std::size_t end) const {
        SourceSpan s;
        s.start = opt_.base_offset + start;
        s.end = opt_.base_offset + end;
        s.line = opt_.base_line;
        s.column = opt_.base_column;
        for (std::size_t i = 0; i < start && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++s.line;
                s.column = 1;
            } else {
                ++s.column;
            }
        }
        return s;
    }

private:
    [[noreturn]] void error(const std::string& what, std::size_t start, std::size_t end) const {
        throw ParseError(what, span(start, end));
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    ExprNode make(NodeKind kind, std::size_t start, std::vector<ExprNode> children) const {
        ExprNode n;
        n.kind = kind;
        n.span = span(start, pos_);
        n.children = std::move(children);
        return n;
    }

    ExprNode expr() {
        const std::size_t start = pos_;
        ExprNode lhs = term();
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            ExprNode rhs = term();
            std::vector<ExprNode> kids;
            kids.push_back(std::move(lhs));
            kids.push_back(std::move(rhs));
            lhs = make(c == '+' ? NodeKind::Add : NodeKind::Sub, start, std::move(kids));
        }
    }

    ExprNode term() {
        skip_ws();
        const std::size_t start = pos_;
        ExprNode lhs = unary();
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c != '*' && c != '/') return lhs;
            if (c == '*' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                error("'**' is not supported; use '^' for powers", pos_, pos_ + 2);
            }
            ++pos_;
            ExprNode rhs = unary();
            std::vector<ExprNode> kids;
            kids.push_back(std::move(lhs));
            kids.push_back(std::move(rhs));
            lhs = make(c == '*' ? NodeKind::Mul : NodeKind::Div, start, std::move(kids));
        }
    }

    ExprNode unary() {
        skip_ws();
        const std::size_t start = pos_;
        if (peek() == '-') {
            ++pos_;
            std::vector<ExprNode> kids;
            kids.push_back(unary());
            return make(NodeKind::Negate, start, std::move(kids));
        }
        return power();
    }

    ExprNode power() {
        skip_ws();
        const std::size_t start = pos_;
        ExprNode base = atom();
        skip_ws();
        if (peek() != '^') return base;
        ++pos_;
        skip_ws();
        const std::size_t estart = pos_;
        bool negative = false;
        if (peek() == '-') {
            negative = true;
            ++pos_;
        }
        const std::size_t dstart = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (dstart == pos_ || peek() == '.' || peek() == 'e' || peek() == 'E') {
            error("integer exponent expected after '^'", estart, pos_ > estart ? pos_ : estart + 1);
        }
        int value = 0;
        auto [ptr, ec] = std::from_chars(src_.data() + dstart, src_.data() + pos_, value);
        if (ec != std::errc() || value > 64) error("exponent out of range", estart, pos_);
        std::vector<ExprNode> kids;
        kids.push_back(std::move(base));
        ExprNode n = make(NodeKind::Power, start, std::move(kids));
        n.exponent = negative ? -value : value;
        return n;
    }

    ExprNode atom() {
        skip_ws();
        const std::size_t start = pos_;
        const char c = peek();
        if (at_end()) error("unexpected end of expression", pos_, pos_);
        if (c == '(') {
            ++pos_;
            ExprNode inner = expr();
            skip_ws();
            if (peek() != ')') error("expected ')'", pos_, pos_ + 1);
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        error(std::string("unexpected '") + c + "'", pos_, pos_ + 1);
        (void)start;
    }

    ExprNode number() {
        const std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t save = pos_;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            const std::size_t dstart = pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            if (dstart == pos_) error("malformed number exponent", save, pos_);
        }
        const std::string text(src_.substr(start, pos_ - start));
        if (text == ".") error("malformed number", start, pos_);
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size()) error("malformed number", start, pos_);
        ExprNode n = make(NodeKind::Number, start, {});
        n.number = v;
        return n;
    }

    ExprNode identifier() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);

        for (const auto& f : kFunctions) {
            if (name == f.name) {
                skip_ws();
                if (peek() != '(') error("expected '(' after function '" + std::string(name) + "'", pos_, pos_ + 1);
                ++pos_;
                ExprNode arg = expr();
                skip_ws();
                if (peek() != ')') error("expected ')'", pos_, pos_ + 1);
                ++pos_;
                std::vector<ExprNode> kids;
                kids.push_back(std::move(arg));
                ExprNode n = make(NodeKind::Call, start, std::move(kids));
                n.function = f.fn;
                return n;
            }
        }

        if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'y')) {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i) digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (digits && name[1] != '0') {
                int index = 0;
                auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
                if (ec != std::errc() || index > n_) {
                    error("variable index exceeds dimension: '" + std::string(name) + "' with n = " + std::to_string(n_),
                          start, pos_);
                }
                if (name[0] == 'y' && !opt_.allow_y) {
                    error("'" + std::string(name) + "' not allowed here: expression may depend on x only", start, pos_);
                }
                ExprNode n = make(NodeKind::Variable, start, {});
                n.is_y = name[0] == 'y';
                n.index = index - 1;
                return n;
            }
        }
        error("unknown identifier '" + std::string(name) + "'", start, pos_);
    }

    std::string_view src_;
    int n_;
    ParseOptions opt_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // Keep the literal a number token even for values printed like "inf".
    return s;
}

}  // namespace

bool Expr::uses_y() const { return root_ && node_uses_y(*root_); }

std::string Expr::snippet(const ExprNode& node) const {
    const std::size_t s = node.span.start - base_offset_;
    const std::size_t e = node.span.end - base_offset_;
    if (s > source_.size() || e > source_.size() || s > e) return {};
    return source_.substr(s, e - s);
}

Expr parse_expression(std::string_view src, int n, const ParseOptions& options) {
    if (n < 1) throw InputError("expression dimension must be at least 1");
    Parser p(src, n, options);
    auto root = std::make_shared<const ExprNode>(p.parse());
    return Expr(std::move(root), std::string(src), n, options.base_offset);
}

const char* function_name(Function f) {
    for (const auto& e : kFunctions) {
        if (e.fn == f) return e.name;
    }
    return "?";
}

std::string to_string(const ExprNode& n) {
    switch (n.kind) {
        case NodeKind::Number: return format_number(n.number);
        case NodeKind::Variable: return std::string(n.is_y ? "y" : "x") + std::to_string(n.index + 1);
        case NodeKind::Negate: return "(-" + to_string(n.children[0]) + ")";
        case NodeKind::Add: return "(" + to_string(n.children[0]) + " + " + to_string(n.children[1]) + ")";
        case NodeKind::Sub: return "(" + to_string(n.children[0]) + " - " + to_string(n.children[1]) + ")";
        case NodeKind::Mul: return "(" + to_string(n.children[0]) + " * " + to_string(n.children[1]) + ")";
        case NodeKind::Div: return "(" + to_string(n.children[0]) + " / " + to_string(n.children[1]) + ")";
        case NodeKind::Power: return "(" + to_string(n.children[0]) + "^" + std::to_string(n.exponent) + ")";
        case NodeKind::Call: return std::string(function_name(n.function)) + "(" + to_string(n.children[0]) + ")";
    }
    return {};
}

std::string to_string(const Expr& e) { return e.valid() ? to_string(e.root()) : std::string(); }

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    switch (a.kind) {
        case NodeKind::Number:
            if (a.number != b.number) return false;
            break;
        case NodeKind::Variable:
            if (a.is_y != b.is_y || a.index != b.index) return false;
            break;
        case NodeKind::Power:
            if (a.exponent != b.exponent) return false;
            break;
        case NodeKind::Call:
            if (a.function != b.function) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!structurally_equal(a.children[i], b.children[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Spray-definition documents

namespace {

struct Entry {
    std::string key;
    std::string value;
    std::size_t value_offset;
    int line;
    int value_column;
};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void doc_error(const std::string& what, const Entry& e) {
    SourceSpan s;
    s.start = e.value_offset;
    s.end = e.value_offset + e.value.size();
    s.line = e.line;
    s.column = e.value_column;
    throw ParseError(what, s);
}

bool parse_index_suffix(std::string_view digits, int n, std::vector<int>& out, std::size_t count) {
    // "12" -> {0, 1} for two-index keys, "3" -> {2}; single digits per index.
    if (digits.size() != count) return false;
    out.clear();
    for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c)) || c == '0') return false;
        const int v = c - '1';
        if (v >= n) return false;
        out.push_back(v);
    }
    return true;
}

}  // namespace

SprayDefinition parse_spray_definition(std::string_view text) {
    std::vector<Entry> entries;
    std::size_t offset = 0;
    int line_no = 0;
    while (offset <= text.size()) {
        std::size_t nl = text.find('\n', offset);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(offset, nl - offset);
        ++line_no;
        std::size_t hash = line.find('#');
        std::string_view content = line.substr(0, hash);
        if (!trim(content).empty()) {
            const std::size_t eq = content.find('=');
            if (eq == std::string_view::npos) {
                SourceSpan s{offset, nl, line_no, 1};
                throw ParseError("expected 'key = value'", s);
            }
            Entry e;
            e.key = trim(content.substr(0, eq));
            std::size_t vstart = eq + 1;
            while (vstart < content.size() && std::isspace(static_cast<unsigned char>(content[vstart]))) ++vstart;
            e.value = trim(content.substr(vstart));
            e.value_offset = offset + vstart;
            e.line = line_no;
            e.value_column = static_cast<int>(vstart) + 1;
            if (e.key.empty()) {
                SourceSpan s{offset, nl, line_no, 1};
                throw ParseError("missing key before '='", s);
            }
            entries.push_back(std::move(e));
        }
        if (nl == text.size()) break;
        offset = nl + 1;
    }

    SprayDefinition def;
    const Entry* dim_entry = nullptr;
    for (const auto& e : entries) {
        if (e.key == "dim") dim_entry = &e;
    }
    if (!dim_entry) throw InputError("spray definition: missing 'dim = n'");
    {
        int n = 0;
        auto [ptr, ec] = std::from_chars(dim_entry->value.data(), dim_entry->value.data() + dim_entry->value.size(), n);
        if (ec != std::errc() || ptr != dim_entry->value.data() + dim_entry->value.size() || n < 2 || n > 8) {
            doc_error("'dim' must be an integer between 2 and 8", *dim_entry);
        }
        def.dim = n;
    }
    const int n = def.dim;

    auto expression = [&](const Entry& e, bool allow_y) {
        if (e.value.empty()) doc_error("empty expression for '" + e.key + "'", e);
        ParseOptions o;
        o.allow_y = allow_y;
        o.base_offset = e.value_offset;
        o.base_line = e.line;
        o.base_column = e.value_column;
        return parse_expression(e.value, n, o);
    };

    std::map<int, Expr> g;
    std::vector<int> idx;
    std::map<std::string, bool> seen;
    for (const auto& e : entries) {
        if (seen[e.key]) doc_error("duplicate key '" + e.key + "'", e);
        seen[e.key] = true;
        if (e.key == "dim") continue;
        if (e.key == "label") {
            def.label = e.value;
        } else if (e.key == "domain") {
            std::istringstream in(e.value);
            std::vector<double> v;
            double d;
            while (in >> d) v.push_back(d);
            if (!in.eof()) doc_error("domain expects numbers", e);
            std::vector<std::pair<double, double>> box;
            if (v.size() == 2) {
                box.assign(static_cast<std::size_t>(n), {v[0], v[1]});
            } else if (v.size() == 2 * static_cast<std::size_t>(n)) {
                for (int i = 0; i < n; ++i) box.emplace_back(v[2 * static_cast<std::size_t>(i)], v[2 * static_cast<std::size_t>(i) + 1]);
            } else {
                doc_error("domain expects 'lo hi' or one 'lo hi' pair per coordinate", e);
            }
            for (const auto& [lo, hi] : box) {
                if (!(lo < hi)) doc_error("domain bounds must satisfy lo < hi", e);
            }
            def.domain = std::move(box);
        } else if (e.key == "sigma") {
            def.sigma = expression(e, false);
        } else if (e.key == "kappa") {
            def.kappa = expression(e, false);
        } else if (e.key == "F") {
            def.F = expression(e, true);
        } else if (e.key.size() >= 2 && e.key[0] == 'G' && parse_index_suffix(std::string_view(e.key).substr(1), n, idx, 1)) {
            g.emplace(idx[0], expression(e, true));
        } else if (e.key.rfind("a_", 0) == 0 && parse_index_suffix(std::string_view(e.key).substr(2), n, idx, 2)) {
            const auto key = std::minmax(idx[0], idx[1]);
            if (def.a.count({key.first, key.second})) doc_error("metric entry given twice (a_ij and a_ji)", e);
            def.a.emplace(std::pair<int, int>{key.first, key.second}, expression(e, false));
        } else if (e.key.rfind("b_", 0) == 0 && parse_index_suffix(std::string_view(e.key).substr(2), n, idx, 1)) {
            def.b.emplace(idx[0], expression(e, false));
        } else {
            doc_error("unknown key '" + e.key + "'", e);
        }
    }

    const bool has_g = !g.empty();
    const bool has_metric = !def.a.empty() || !def.b.empty();
    const int blocks = (has_g ? 1 : 0) + (def.F ? 1 : 0) + (has_metric ? 1 : 0);
    if (blocks != 1) {
        throw InputError("spray definition must contain exactly one of: G1..Gn, F, or a metric block a_ij [b_i]");
    }
    if (has_g) {
        for (int i = 0; i < n; ++i) {
            auto it = g.find(i);
            if (it == g.end()) throw InputError("spray definition: missing G" + std::to_string(i + 1));
            def.G.push_back(it->second);
        }
    }
    if (has_metric) {
        for (int i = 0; i < n; ++i) {
            if (!def.a.count({i, i})) {
                throw InputError("spray definition: missing diagonal metric entry a_" + std::to_string(i + 1) + std::to_string(i + 1));
            }
        }
    }
    if (def.kappa && def.b.empty()) throw InputError("spray definition: 'kappa' requires a Randers block (b_i)");
    return def;
}

SprayDefinition load_spray_definition(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open spray definition '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spray_definition(ss.str());
}

}  // namespace spraylab
