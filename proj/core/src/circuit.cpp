#include "qorch/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace qorch {

namespace {

const std::map<std::string, GateKind> kNameToKind = {
    {"h", GateKind::H},     {"x", GateKind::X},     {"y", GateKind::Y},
    {"z", GateKind::Z},     {"s", GateKind::S},     {"sdg", GateKind::Sdg},
    {"t", GateKind::T},     {"tdg", GateKind::Tdg}, {"rx", GateKind::RX},
    {"ry", GateKind::RY},   {"rz", GateKind::RZ},   {"cx", GateKind::CX},
    {"cz", GateKind::CZ},   {"rzz", GateKind::RZZ}, {"swap", GateKind::SWAP},
    {"cry", GateKind::CRY}, {"cp", GateKind::CP}};

} // namespace

const char* gate_name(GateKind k) {
    switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::S: return "s";
    case GateKind::Sdg: return "sdg";
    case GateKind::T: return "t";
    case GateKind::Tdg: return "tdg";
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::CX: return "cx";
    case GateKind::CZ: return "cz";
    case GateKind::RZZ: return "rzz";
    case GateKind::SWAP: return "swap";
    case GateKind::CRY: return "cry";
    case GateKind::CP: return "cp";
    }
    return "?";
}

std::optional<GateKind> gate_from_name(const std::string& name) {
    auto it = kNameToKind.find(name);
    if (it == kNameToKind.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Parser. Hand-rolled scanner over the statement grammar; every failure is a
// ParseError carrying 1-based line/column.

namespace {

class Scanner {
public:
    explicit Scanner(const std::string& text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c) {
        skip_ws();
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        advance();
    }

    bool try_consume(char c) {
        skip_ws();
        if (peek() == c) {
            advance();
            return true;
        }
        return false;
    }

    std::string identifier() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            advance();
        if (pos_ == start) fail("expected identifier");
        return text_.substr(start, pos_ - start);
    }

    long integer() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            advance();
        if (pos_ == start) fail("expected integer");
        return std::stol(text_.substr(start, pos_ - start));
    }

    double number() {
        skip_ws();
        size_t start = pos_;
        auto in_number = [&](char c) {
            return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
                   c == '+' || c == 'e' || c == 'E';
        };
        while (pos_ < text_.size() && in_number(text_[pos_])) advance();
        if (pos_ == start) fail("expected number");
        std::string s = text_.substr(start, pos_ - start);
        // allow "pi" shorthand? keep strict: numbers only
        size_t used = 0;
        double v;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("malformed number '" + s + "'");
            return 0; // unreachable
        }
        if (used != s.size()) fail("malformed number '" + s + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(line_, col_, msg);
    }

    int line() const { return line_; }
    int col() const { return col_; }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace

Circuit parse_circuit_text(const std::string& text) {
    Scanner sc(text);
    Circuit c;

    // declaration: qreg q[N];
    sc.skip_ws();
    if (sc.eof()) throw ParseError(1, 1, "empty program: expected 'qreg q[N];'");
    std::string kw = sc.identifier();
    if (kw != "qreg") sc.fail("expected 'qreg' declaration first, got '" + kw + "'");
    std::string reg = sc.identifier();
    if (reg != "q") sc.fail("only register name 'q' is supported");
    sc.expect('[');
    long n = sc.integer();
    sc.expect(']');
    sc.expect(';');
    if (n < 1) sc.fail("register size must be positive");
    c.num_qubits = static_cast<int>(n);

    auto read_qubit = [&]() -> int {
        std::string r = sc.identifier();
        if (r != "q") sc.fail("unknown register '" + r + "'");
        sc.expect('[');
        long q = sc.integer();
        sc.expect(']');
        if (q >= n) sc.fail("qubit index " + std::to_string(q) + " out of range (register size " +
                            std::to_string(n) + ")");
        return static_cast<int>(q);
    };

    std::set<int> measured;
    while (!sc.eof()) {
        int line = sc.line(), col = sc.col();
        std::string word = sc.identifier();
        if (word == "measure") {
            std::string r = sc.identifier();
            if (r != "q") sc.fail("unknown register '" + r + "'");
            if (sc.try_consume('[')) {
                long q = sc.integer();
                sc.expect(']');
                if (q >= n) sc.fail("measured qubit out of range");
                if (!measured.insert(static_cast<int>(q)).second)
                    sc.fail("qubit " + std::to_string(q) + " measured twice");
                c.measured_qubits.push_back(static_cast<int>(q));
            } else {
                // measure q; == measure every qubit in index order
                for (int q = 0; q < c.num_qubits; ++q) {
                    if (!measured.insert(q).second)
                        sc.fail("qubit " + std::to_string(q) + " measured twice");
                    c.measured_qubits.push_back(q);
                }
            }
            sc.expect(';');
            continue;
        }
        auto kind = gate_from_name(word);
        if (!kind) throw ParseError(line, col, "unknown gate '" + word + "'");

        GateOp op;
        op.kind = *kind;
        if (gate_has_angle(*kind)) {
            sc.expect('(');
            double angle = sc.number();
            if (!std::isfinite(angle)) sc.fail("angle must be finite");
            sc.expect(')');
            op.params.push_back(angle);
        }
        op.qubits.push_back(read_qubit());
        if (gate_arity(*kind) == 2) {
            sc.expect(',');
            op.qubits.push_back(read_qubit());
            if (op.qubits[0] == op.qubits[1])
                throw ParseError(line, col, "duplicate qubit operands on '" + word + "'");
        }
        sc.expect(';');
        c.ops.push_back(std::move(op));
    }
    return c;
}

std::string serialize_circuit(const Circuit& c) {
    std::ostringstream out;
    out << "qreg q[" << c.num_qubits << "];\n";
    char buf[64];
    for (const auto& op : c.ops) {
        out << gate_name(op.kind);
        if (!op.params.empty()) {
            std::snprintf(buf, sizeof(buf), "%.17g", op.params[0]);
            out << '(' << buf << ')';
        }
        out << " q[" << op.qubits[0] << ']';
        if (op.qubits.size() == 2) out << ",q[" << op.qubits[1] << ']';
        out << ";\n";
    }
    // compact form when all qubits are measured in order
    bool all_in_order = static_cast<int>(c.measured_qubits.size()) == c.num_qubits;
    if (all_in_order) {
        for (int i = 0; i < c.num_qubits; ++i)
            if (c.measured_qubits[i] != i) { all_in_order = false; break; }
    }
    if (all_in_order) {
        out << "measure q;\n";
    } else {
        for (int q : c.measured_qubits) out << "measure q[" << q << "];\n";
    }
    return out.str();
}

std::vector<std::string> validate(const Circuit& c) {
    std::vector<std::string> v;
    if (c.num_qubits < 1) v.push_back("num_qubits must be positive");
    for (size_t i = 0; i < c.ops.size(); ++i) {
        const auto& op = c.ops[i];
        const std::string where = "op " + std::to_string(i) + " (" + gate_name(op.kind) + ")";
        if (static_cast<int>(op.qubits.size()) != gate_arity(op.kind))
            v.push_back(where + ": arity mismatch");
        if (op.qubits.size() == 2 && op.qubits[0] == op.qubits[1])
            v.push_back(where + ": duplicate qubit operands");
        for (int q : op.qubits)
            if (q < 0 || q >= c.num_qubits)
                v.push_back(where + ": qubit index " + std::to_string(q) + " out of range");
        size_t want = gate_has_angle(op.kind) ? 1 : 0;
        if (op.params.size() != want)
            v.push_back(where + (want ? ": missing angle" : ": unexpected parameter"));
        for (double p : op.params)
            if (!std::isfinite(p)) v.push_back(where + ": non-finite angle");
    }
    std::set<int> seen;
    for (int q : c.measured_qubits) {
        if (q < 0 || q >= c.num_qubits)
            v.push_back("measurement: qubit index " + std::to_string(q) + " out of range");
        if (!seen.insert(q).second)
            v.push_back("measurement: qubit " + std::to_string(q) + " duplicated");
    }
    return v;
}

void require_valid(const Circuit& c) {
    auto v = validate(c);
    if (v.empty()) return;
    std::string msg = "invalid circuit:";
    for (const auto& s : v) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// Gate matrices

std::array<cplx, 4> gate_matrix_1q(GateKind k, const std::vector<double>& params) {
    const double isq = 1.0 / std::sqrt(2.0);
    const cplx i(0, 1);
    switch (k) {
    case GateKind::H: return {isq, isq, isq, -isq};
    case GateKind::X: return {0, 1, 1, 0};
    case GateKind::Y: return {0, -i, i, 0};
    case GateKind::Z: return {1, 0, 0, -1};
    case GateKind::S: return {1, 0, 0, i};
    case GateKind::Sdg: return {1, 0, 0, -i};
    case GateKind::T: return {1, 0, 0, std::exp(i * (M_PI / 4))};
    case GateKind::Tdg: return {1, 0, 0, std::exp(-i * (M_PI / 4))};
    case GateKind::RX: {
        double h = params.at(0) / 2;
        return {std::cos(h), -i * std::sin(h), -i * std::sin(h), std::cos(h)};
    }
    case GateKind::RY: {
        double h = params.at(0) / 2;
        return {std::cos(h), -std::sin(h), std::sin(h), std::cos(h)};
    }
    case GateKind::RZ: {
        double h = params.at(0) / 2;
        return {std::exp(-i * h), 0, 0, std::exp(i * h)};
    }
    default:
        throw std::invalid_argument("not a one-qubit gate");
    }
}

std::array<cplx, 16> gate_matrix_2q(GateKind k, const std::vector<double>& params) {
    const cplx i(0, 1);
    std::array<cplx, 16> m{};
    auto at = [&m](int r, int c) -> cplx& { return m[r * 4 + c]; };
    switch (k) {
    case GateKind::CX:
        at(0, 0) = at(1, 1) = 1;
        at(2, 3) = at(3, 2) = 1;
        return m;
    case GateKind::CZ:
        at(0, 0) = at(1, 1) = at(2, 2) = 1;
        at(3, 3) = -1;
        return m;
    case GateKind::SWAP:
        at(0, 0) = at(3, 3) = 1;
        at(1, 2) = at(2, 1) = 1;
        return m;
    case GateKind::RZZ: {
        double h = params.at(0) / 2;
        at(0, 0) = at(3, 3) = std::exp(-i * h);
        at(1, 1) = at(2, 2) = std::exp(i * h);
        return m;
    }
    case GateKind::CP:
        at(0, 0) = at(1, 1) = at(2, 2) = 1;
        at(3, 3) = std::exp(i * params.at(0));
        return m;
    case GateKind::CRY: {
        double h = params.at(0) / 2;
        at(0, 0) = at(1, 1) = 1;
        at(2, 2) = std::cos(h);
        at(2, 3) = -std::sin(h);
        at(3, 2) = std::sin(h);
        at(3, 3) = std::cos(h);
        return m;
    }
    default:
        throw std::invalid_argument("not a two-qubit gate");
    }
}

GateOp inverse_op(const GateOp& op) {
    GateOp inv = op;
    switch (op.kind) {
    case GateKind::S: inv.kind = GateKind::Sdg; break;
    case GateKind::Sdg: inv.kind = GateKind::S; break;
    case GateKind::T: inv.kind = GateKind::Tdg; break;
    case GateKind::Tdg: inv.kind = GateKind::T; break;
    case GateKind::RX: case GateKind::RY: case GateKind::RZ:
    case GateKind::RZZ: case GateKind::CRY: case GateKind::CP:
        inv.params[0] = -op.params[0];
        break;
    default:
        break; // self-inverse
    }
    return inv;
}

} // namespace qorch
