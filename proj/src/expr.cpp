#include "dynpop/expr.hpp"

#include <charconv>
#include <cmath>
#include <optional>

#include "dynpop/error.hpp"

namespace dynpop {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div:
      return 2;
    case Expr::Kind::Neg:
      return 3;
    default:
      return 4;
  }
}

void print(const Expr& e, std::string& out) {
  using K = Expr::Kind;
  const auto& idx = e.index();
  switch (e.kind()) {
    case K::Number:
      out += format_number(e.value());
      return;
    case K::StateRef:
      out += "d(" + std::to_string(idx[0]) + "," + std::to_string(idx[1]) + ")";
      return;
    case K::PolicyRef:
      out += "pi(" + std::to_string(idx[0]) + "," + std::to_string(idx[1]) + "," + std::to_string(idx[2]) + ")";
      return;
    case K::MassRef:
      out += "g(" + std::to_string(idx[0]) + ")";
      return;
    case K::Neg: {
      const Expr& arg = e.args()[0];
      // A bare literal would fold back into a negative constant.
      bool paren = precedence(arg.kind()) < 3 || arg.kind() == K::Number;
      out += "-";
      if (paren) out += "(";
      print(arg, out);
      if (paren) out += ")";
      return;
    }
    case K::Exp:
    case K::Log:
    case K::Min:
    case K::Max: {
      out += e.kind() == K::Exp ? "exp(" : e.kind() == K::Log ? "log(" : e.kind() == K::Min ? "min(" : "max(";
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) out += ",";
        print(e.args()[i], out);
      }
      out += ")";
      return;
    }
    case K::Add:
    case K::Sub:
    case K::Mul:
    case K::Div: {
      int p = precedence(e.kind());
      const Expr& l = e.args()[0];
      const Expr& r = e.args()[1];
      bool lp = precedence(l.kind()) < p;
      bool rp = precedence(r.kind()) <= p;
      if (lp) out += "(";
      print(l, out);
      if (lp) out += ")";
      out += e.kind() == K::Add ? " + " : e.kind() == K::Sub ? " - " : e.kind() == K::Mul ? "*" : "/";
      if (rp) out += "(";
      print(r, out);
      if (rp) out += ")";
      return;
    }
  }
}

enum class Tok { Number, Ident, LParen, RParen, Comma, Plus, Minus, Star, Slash, End };

struct Token {
  Tok kind;
  std::string_view text;
  int column;  // 1-based
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) { advance(); }

  Expr parse() {
    Expr e = expr();
    if (tok_.kind != Tok::End) fail_syntax(tok_.column, "unexpected '" + std::string(tok_.text) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail_syntax(int column, const std::string& what) {
    throw SyntaxError("syntax error at column " + std::to_string(column) + ": " + what);
  }

  void advance() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
    int column = static_cast<int>(pos_) + 1;
    if (pos_ >= text_.size()) {
      tok_ = {Tok::End, {}, column};
      return;
    }
    char c = text_[pos_];
    auto single = [&](Tok k) {
      tok_ = {k, text_.substr(pos_, 1), column};
      ++pos_;
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      default: break;
    }
    std::size_t start = pos_;
    if ((c >= '0' && c <= '9') || c == '.') {
      while (pos_ < text_.size() && ((text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '.')) ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
          while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        } else {
          pos_ = save;
        }
      }
      tok_ = {Tok::Number, text_.substr(start, pos_ - start), column};
      return;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      while (pos_ < text_.size() && ((text_[pos_] >= 'a' && text_[pos_] <= 'z') || (text_[pos_] >= 'A' && text_[pos_] <= 'Z') ||
                                     (text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '_'))
        ++pos_;
      tok_ = {Tok::Ident, text_.substr(start, pos_ - start), column};
      return;
    }
    fail_syntax(column, "unexpected character '" + std::string(1, c) + "'");
  }

  void expect(Tok kind, const std::string& what) {
    if (tok_.kind != kind) fail_syntax(tok_.column, "expected " + what);
    advance();
  }

  double number_value(const Token& t) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !std::isfinite(v))
      fail_syntax(t.column, "malformed number '" + std::string(t.text) + "'");
    return v;
  }

  Expr expr() {
    Expr e = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      auto k = tok_.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      advance();
      e = Expr::binary(k, e, term());
    }
    return e;
  }

  Expr term() {
    Expr e = factor();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      auto k = tok_.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div;
      advance();
      e = Expr::binary(k, e, factor());
    }
    return e;
  }

  Expr factor() {
    Token t = tok_;
    switch (t.kind) {
      case Tok::Number:
        advance();
        return Expr::number(number_value(t));
      case Tok::Minus:
        advance();
        if (tok_.kind == Tok::Number) {
          Token n = tok_;
          advance();
          return Expr::number(-number_value(n));
        }
        return Expr::unary(Expr::Kind::Neg, factor());
      case Tok::LParen: {
        advance();
        Expr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        return call();
      case Tok::End:
        fail_syntax(t.column, "unexpected end of expression");
      default:
        fail_syntax(t.column, "expected expression, found '" + std::string(t.text) + "'");
    }
  }

  Expr call() {
    Token name = tok_;
    std::string id(name.text);
    bool is_ref = id == "d" || id == "pi" || id == "g";
    bool is_func = id == "exp" || id == "log" || id == "min" || id == "max";
    if (!is_ref && !is_func)
      throw UnknownIdentifierError("unknown identifier '" + id + "' at column " + std::to_string(name.column));
    advance();
    expect(Tok::LParen, "'(' after '" + id + "'");
    std::size_t expected = id == "d" ? 2 : id == "pi" ? 3 : id == "g" ? 1 : (id == "exp" || id == "log") ? 1 : 2;
    auto arity_fail = [&](std::size_t got) {
      throw ArityError("arity error at column " + std::to_string(name.column) + ": '" + id + "' expects " +
                       std::to_string(expected) + " argument" + (expected == 1 ? "" : "s") + ", got " +
                       std::to_string(got));
    };
    if (is_ref) {
      std::vector<int> idx;
      while (true) {
        if (tok_.kind != Tok::Number || tok_.text.find_first_not_of("0123456789") != std::string_view::npos)
          fail_syntax(tok_.column, "expected integer index");
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), v);
        if (ec != std::errc()) fail_syntax(tok_.column, "index out of integer range");
        idx.push_back(v);
        advance();
        if (tok_.kind == Tok::Comma) {
          advance();
          continue;
        }
        break;
      }
      expect(Tok::RParen, "')'");
      if (idx.size() != expected) arity_fail(idx.size());
      if (id == "d") return Expr::state_ref(idx[0], idx[1]);
      if (id == "pi") return Expr::policy_ref(idx[0], idx[1], idx[2]);
      return Expr::mass_ref(idx[0]);
    }
    std::vector<Expr> args;
    args.push_back(expr());
    while (tok_.kind == Tok::Comma) {
      advance();
      args.push_back(expr());
    }
    expect(Tok::RParen, "')'");
    if (args.size() != expected) arity_fail(args.size());
    if (id == "exp") return Expr::unary(Expr::Kind::Exp, args[0]);
    if (id == "log") return Expr::unary(Expr::Kind::Log, args[0]);
    return Expr::binary(id == "min" ? Expr::Kind::Min : Expr::Kind::Max, args[0], args[1]);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token tok_{Tok::End, {}, 1};
};

}  // namespace

Expr Expr::number(double value) {
  if (!std::isfinite(value)) throw SpecError("numeric literal must be finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::state_ref(int tau, int x) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::StateRef;
  n->index = {tau, x, 0};
  return Expr(std::move(n));
}

Expr Expr::policy_ref(int tau, int a, int x) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::PolicyRef;
  n->index = {tau, a, x};
  return Expr(std::move(n));
}

Expr Expr::mass_ref(int tau) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::MassRef;
  n->index = {tau, 0, 0};
  return Expr(std::move(n));
}

Expr Expr::unary(Kind kind, Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args.push_back(std::move(lhs));
  n->args.push_back(std::move(rhs));
  return Expr(std::move(n));
}

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

bool Expr::operator==(const Expr& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::Number:
      return value() == other.value();
    case Kind::StateRef:
    case Kind::PolicyRef:
    case Kind::MassRef:
      return index() == other.index();
    default:
      return args() == other.args();
  }
}

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

void check_references(const Expr& expr, Dims dims, const ActionMask& mask, const std::string& where) {
  const auto& i = expr.index();
  auto fail = [&](const std::string& ref) {
    throw IndexError(where + "reference " + ref + " out of range");
  };
  switch (expr.kind()) {
    case Expr::Kind::StateRef:
      if (i[0] < 0 || i[1] < 0 || i[0] >= dims.types || i[1] >= dims.states)
        fail("d(" + std::to_string(i[0]) + "," + std::to_string(i[1]) + ")");
      return;
    case Expr::Kind::PolicyRef: {
      std::string ref = "pi(" + std::to_string(i[0]) + "," + std::to_string(i[1]) + "," + std::to_string(i[2]) + ")";
      if (i[0] < 0 || i[1] < 0 || i[2] < 0 || i[0] >= dims.types || i[1] >= dims.actions || i[2] >= dims.states) fail(ref);
      if (!mask.allowed(i[0], i[2], i[1])) throw IndexError(where + "reference " + ref + " names a masked action");
      return;
    }
    case Expr::Kind::MassRef:
      if (i[0] < 0 || i[0] >= dims.types) fail("g(" + std::to_string(i[0]) + ")");
      return;
    default:
      for (const auto& a : expr.args()) check_references(a, dims, mask, where);
  }
}

CompiledExpr::CompiledExpr(const Expr& expr, const Vector& type_mass) {
  emit(expr, type_mass);
  int depth = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::Const:
      case Op::State:
      case Op::Policy:
        ++depth;
        break;
      case Op::Neg:
      case Op::Exp:
      case Op::Log:
        break;
      default:
        --depth;
    }
    max_depth_ = std::max(max_depth_, depth);
  }
}

void CompiledExpr::emit(const Expr& e, const Vector& type_mass) {
  using K = Expr::Kind;
  const auto& i = e.index();
  switch (e.kind()) {
    case K::Number:
      code_.push_back({Op::Const, 0, 0, 0, e.value()});
      return;
    case K::StateRef:
      code_.push_back({Op::State, i[0], i[1], 0, 0.0});
      return;
    case K::PolicyRef:
      code_.push_back({Op::Policy, i[0], i[1], i[2], 0.0});
      return;
    case K::MassRef:
      code_.push_back({Op::Const, 0, 0, 0, type_mass(i[0])});
      return;
    default:
      break;
  }
  for (const auto& a : e.args()) emit(a, type_mass);
  Op op = Op::Add;
  switch (e.kind()) {
    case K::Add: op = Op::Add; break;
    case K::Sub: op = Op::Sub; break;
    case K::Mul: op = Op::Mul; break;
    case K::Div: op = Op::Div; break;
    case K::Neg: op = Op::Neg; break;
    case K::Exp: op = Op::Exp; break;
    case K::Log: op = Op::Log; break;
    case K::Min: op = Op::Min; break;
    case K::Max: op = Op::Max; break;
    default: break;
  }
  code_.push_back({op, 0, 0, 0, 0.0});
}

double CompiledExpr::eval(const SocialState& s) const {
  constexpr int kInline = 32;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* st = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    st = heap.data();
  }
  int top = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::Const: st[top++] = in.value; break;
      case Op::State: st[top++] = s.d.mass[in.i0](in.i1); break;
      case Op::Policy: st[top++] = s.pi.table[in.i0](in.i2, in.i1); break;
      case Op::Add: --top; st[top - 1] += st[top]; break;
      case Op::Sub: --top; st[top - 1] -= st[top]; break;
      case Op::Mul: --top; st[top - 1] *= st[top]; break;
      case Op::Div:
        --top;
        if (st[top] == 0.0) throw EvalError("division by zero");
        st[top - 1] /= st[top];
        break;
      case Op::Neg: st[top - 1] = -st[top - 1]; break;
      case Op::Exp: st[top - 1] = std::exp(st[top - 1]); break;
      case Op::Log:
        if (!(st[top - 1] > 0.0)) throw EvalError("log of non-positive value");
        st[top - 1] = std::log(st[top - 1]);
        break;
      case Op::Min: --top; st[top - 1] = std::min(st[top - 1], st[top]); break;
      case Op::Max: --top; st[top - 1] = std::max(st[top - 1], st[top]); break;
    }
  }
  return st[0];
}

}  // namespace dynpop
