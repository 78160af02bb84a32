#pragma once

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weldmill/expr.hpp"
#include "weldmill/lexer.hpp"

namespace weldmill {

struct ParseOptions {
  std::size_t maxLength = std::size_t{1} << 20;
  // Bound on parser recursion and on the depth of the produced tree.
  int maxDepth = 512;
};

ExprPtr parse(std::string_view src, const ParseOptions& opts = {});
IrType parseType(std::string_view src);

// Value a merge op starts from: + -> 0, * -> 1, min -> max of the type,
// max -> min of the type. Structures fold component-wise.
Literal mergeIdentity(ScalarKind k, BinOp op);

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const ParseOptions& opts) : src_(src), opts_(opts), toks_(lex(src)) {}

  ExprPtr program() {
    ExprPtr e = expr();
    expect(Tok::End, "end of input");
    return e;
  }

  IrType typeOnly() {
    IrType t = type();
    expect(Tok::End, "end of input");
    return t;
  }

 private:
  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > p.opts_.maxDepth)
        throw ParseError("expression nested too deeply", p.peek().span);
    }
    ~DepthGuard() { --p.depth_; }
  };

  const Token& peek(std::size_t k = 0) const {
    std::size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok t) const { return peek().kind == t; }
  bool atIdent(std::string_view name) const { return at(Tok::Ident) && peek().text == name; }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok t) {
    if (!at(t)) return false;
    advance();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg, const std::string& expected = {}) const {
    throw ParseError(msg, peek().span, expected);
  }
  const Token& expect(Tok t, const std::string& what) {
    if (!at(t)) {
      std::string got = at(Tok::End) ? "end of input" : "'" + tokenText(peek()) + "'";
      fail("expected " + what + " but found " + got, tokName(t));
    }
    return advance();
  }
  std::string tokenText(const Token& t) const {
    return std::string(src_.substr(t.span.begin, t.span.end - t.span.begin));
  }
  std::uint32_t startOf() const { return peek().span.begin; }
  Span spanFrom(std::uint32_t begin) const {
    std::uint32_t end = pos_ > 0 ? toks_[pos_ - 1].span.end : begin;
    return {begin, std::max(begin, end)};
  }

  template <class F>
  ExprPtr build(Span span, F&& f) {
    try {
      return f();
    } catch (const std::logic_error& err) {
      throw ParseError(err.what(), span);
    }
  }

  // expr := let | lambda | binary
  ExprPtr expr() {
    DepthGuard guard(*this);
    if (at(Tok::Ident) && peek(1).kind == Tok::Assign) return letExpr();
    if (lambdaAhead()) return lambdaExpr();
    return binary(0);
  }

  ExprPtr letExpr() {
    auto begin = startOf();
    std::string name = advance().text;
    checkBindable(name);
    expect(Tok::Assign, "':='");
    ExprPtr value = expr();
    expect(Tok::Semi, "';'");
    ExprPtr body = expr();
    return ir::let(std::move(name), std::move(value), std::move(body), spanFrom(begin));
  }

  void checkBindable(const std::string& name) {
    if (name == "true" || name == "false")
      throw ParseError("cannot bind reserved name '" + name + "'", toks_[pos_ ? pos_ - 1 : 0].span);
  }

  bool lambdaAhead() {
    if (at(Tok::Ident) && peek(1).kind == Tok::Arrow) return true;
    if (!at(Tok::LParen)) return false;
    std::size_t save = pos_;
    bool ok = false;
    try {
      params();
      ok = at(Tok::Arrow);
    } catch (const ParseError&) {
      ok = false;
    }
    pos_ = save;
    return ok;
  }

  std::vector<Param> params() {
    std::vector<Param> out;
    if (at(Tok::Ident)) {
      out.push_back({advance().text, {}});
      return out;
    }
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      do {
        Param p;
        p.name = expect(Tok::Ident, "parameter name").text;
        checkBindable(p.name);
        if (accept(Tok::Colon)) p.type = type();
        out.push_back(std::move(p));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    return out;
  }

  ExprPtr lambdaExpr() {
    auto begin = startOf();
    auto ps = params();
    expect(Tok::Arrow, "'=>'");
    ExprPtr body = expr();
    return ir::lambda(std::move(ps), std::move(body), spanFrom(begin));
  }

  static std::optional<std::pair<BinOp, int>> infix(Tok t) {
    switch (t) {
      case Tok::OrOr: return {{BinOp::Or, 1}};
      case Tok::AndAnd: return {{BinOp::And, 2}};
      case Tok::Pipe: return {{BinOp::BitOr, 3}};
      case Tok::Amp: return {{BinOp::BitAnd, 4}};
      case Tok::EqEq: return {{BinOp::Eq, 5}};
      case Tok::NotEq: return {{BinOp::Ne, 5}};
      case Tok::Lt: return {{BinOp::Lt, 6}};
      case Tok::Le: return {{BinOp::Le, 6}};
      case Tok::Gt: return {{BinOp::Gt, 6}};
      case Tok::Ge: return {{BinOp::Ge, 6}};
      case Tok::Plus: return {{BinOp::Add, 7}};
      case Tok::Minus: return {{BinOp::Sub, 7}};
      case Tok::Star: return {{BinOp::Mul, 8}};
      case Tok::Slash: return {{BinOp::Div, 8}};
      case Tok::Percent: return {{BinOp::Mod, 8}};
      default: return std::nullopt;
    }
  }

  ExprPtr binary(int minPrec) {
    auto begin = startOf();
    ExprPtr lhs = unary();
    for (;;) {
      auto op = infix(peek().kind);
      if (!op || op->second < minPrec) break;
      advance();
      ExprPtr rhs = binaryOperand(op->second + 1);
      lhs = ir::binary(op->first, std::move(lhs), std::move(rhs), spanFrom(begin));
    }
    return lhs;
  }

  ExprPtr binaryOperand(int minPrec) {
    DepthGuard guard(*this);
    return binary(minPrec);
  }

  ExprPtr unary() {
    DepthGuard guard(*this);
    auto begin = startOf();
    if (at(Tok::Minus) && (peek(1).kind == Tok::Int || peek(1).kind == Tok::Float)) {
      advance();
      ExprPtr lit = literal(true, begin);
      return postfix(lit, begin);
    }
    if (accept(Tok::Minus)) return ir::unary(UnaryOp::Neg, unary(), spanFrom(begin));
    if (accept(Tok::Bang)) return ir::unary(UnaryOp::Not, unary(), spanFrom(begin));
    ExprPtr base = primary();
    return postfix(base, begin);
  }

  ExprPtr postfix(ExprPtr e, std::uint32_t begin) {
    for (;;) {
      if (accept(Tok::Dot)) {
        const Token& t = expect(Tok::Int, "field index");
        if (!t.suffix.empty() || t.text.size() > 9) fail("bad field index");
        e = ir::getField(std::move(e), std::stoi(t.text), spanFrom(begin));
      } else if (at(Tok::LParen)) {
        advance();
        auto args = exprList(Tok::RParen, true);
        e = ir::apply(std::move(e), std::move(args), spanFrom(begin));
      } else {
        return e;
      }
    }
  }

  std::vector<ExprPtr> exprList(Tok close, bool allowEmpty) {
    std::vector<ExprPtr> out;
    if (allowEmpty && accept(close)) return out;
    do {
      out.push_back(expr());
    } while (accept(Tok::Comma));
    expect(close, tokName(close));
    return out;
  }

  ExprPtr literal(bool negative, std::uint32_t begin) {
    const Token& t = advance();
    Span span{begin, t.span.end};
    if (t.kind == Tok::Int) {
      bool i32 = t.suffix == "si32" || t.suffix == "i32";
      if (!i32 && !t.suffix.empty() && t.suffix != "L" && t.suffix != "i64")
        throw ParseError("unknown integer suffix '" + t.suffix + "'", t.span);
      errno = 0;
      unsigned long long mag = std::strtoull(t.text.c_str(), nullptr, 10);
      if (errno == ERANGE) throw ParseError("integer literal out of range", t.span);
      if (i32) {
        unsigned long long lim = negative ? 2147483648ULL : 2147483647ULL;
        if (mag > lim) throw ParseError("i32 literal out of range", t.span);
        auto v = static_cast<std::int64_t>(mag);
        return ir::lit(Literal{static_cast<std::int32_t>(negative ? -v : v)}, span);
      }
      unsigned long long lim = negative ? 9223372036854775808ULL : 9223372036854775807ULL;
      if (mag > lim) throw ParseError("i64 literal out of range", t.span);
      std::int64_t v = negative ? static_cast<std::int64_t>(0ULL - mag) : static_cast<std::int64_t>(mag);
      return ir::lit(Literal{v}, span);
    }
    bool f32 = t.suffix == "f" || t.suffix == "f32";
    if (!f32 && !t.suffix.empty() && t.suffix != "f64")
      throw ParseError("unknown float suffix '" + t.suffix + "'", t.span);
    if (f32) {
      float v = std::strtof(t.text.c_str(), nullptr);
      return ir::lit(Literal{negative ? -v : v}, span);
    }
    double v = std::strtod(t.text.c_str(), nullptr);
    return ir::lit(Literal{negative ? -v : v}, span);
  }

  ExprPtr primary() {
    auto begin = startOf();
    switch (peek().kind) {
      case Tok::Int:
      case Tok::Float: return literal(false, begin);
      case Tok::LParen: {
        advance();
        ExprPtr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBrace: {
        advance();
        auto elems = exprList(Tok::RBrace, false);
        return ir::makeStruct(std::move(elems), spanFrom(begin));
      }
      case Tok::LBracket: {
        advance();
        auto elems = exprList(Tok::RBracket, false);
        return ir::makeVector(std::move(elems), spanFrom(begin));
      }
      case Tok::Ident: return identOrForm(begin);
      default: {
        std::string got = at(Tok::End) ? "end of input" : "'" + tokenText(peek()) + "'";
        fail("expected expression but found " + got, "expression");
      }
    }
  }

  static std::optional<BuilderTag> builderTagNamed(std::string_view n) {
    if (n == "vecbuilder") return BuilderTag::VecBuilder;
    if (n == "merger") return BuilderTag::Merger;
    if (n == "dictmerger") return BuilderTag::DictMerger;
    if (n == "vecmerger") return BuilderTag::VecMerger;
    if (n == "groupbuilder") return BuilderTag::GroupBuilder;
    return std::nullopt;
  }

  static std::optional<ScalarKind> scalarNamed(std::string_view n) {
    if (n == "bool") return ScalarKind::Bool;
    if (n == "i32") return ScalarKind::I32;
    if (n == "i64" || n == "int") return ScalarKind::I64;
    if (n == "f32") return ScalarKind::F32;
    if (n == "f64" || n == "float") return ScalarKind::F64;
    return std::nullopt;
  }

  static std::optional<SugarOp> sugarNamed(std::string_view n) {
    if (n == "map") return SugarOp::Map;
    if (n == "filter") return SugarOp::Filter;
    if (n == "flatmap") return SugarOp::FlatMap;
    if (n == "reduce") return SugarOp::Reduce;
    if (n == "zip") return SugarOp::Zip;
    if (n == "groupby") return SugarOp::GroupBy;
    return std::nullopt;
  }

  std::vector<ExprPtr> callArgs(std::size_t n, const std::string& form) {
    expect(Tok::LParen, "'('");
    auto args = exprList(Tok::RParen, true);
    if (args.size() != n)
      throw ParseError(form + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"),
                       toks_[pos_ - 1].span);
    return args;
  }

  ExprPtr identOrForm(std::uint32_t begin) {
    const std::string name = peek().text;
    Tok next = peek(1).kind;
    if (name == "true" || name == "false") {
      advance();
      return ir::lit(Literal{name == "true"}, spanFrom(begin));
    }
    if (auto tag = builderTagNamed(name); tag && next == Tok::LBracket) return builderCtor(*tag, begin);
    if (next != Tok::LParen) {
      advance();
      return ir::ident(name, spanFrom(begin));
    }
    if (name == "if") return ifForm(begin);
    if (name == "for") return forForm(begin);
    if (name == "call") return callForm(begin);
    if (name == "iter" || name == "simditer" || name == "fringeiter")
      fail("'" + name + "' is only valid as a for-loop iterator");
    advance();
    auto sp = [&] { return spanFrom(begin); };
    if (auto s = sugarNamed(name)) {
      expect(Tok::LParen, "'('");
      auto args = exprList(Tok::RParen, true);
      return ir::sugar(*s, std::move(args), sp());
    }
    if (auto k = scalarNamed(name)) {
      auto a = callArgs(1, name);
      return ir::cast(*k, a[0], sp());
    }
    if (name == "bitselect") {
      auto a = callArgs(3, name);
      return ir::bitSelect(a[0], a[1], a[2], sp());
    }
    if (name == "iterate") {
      auto a = callArgs(2, name);
      return ir::iterate(a[0], a[1], sp());
    }
    if (name == "lookup") {
      auto a = callArgs(2, name);
      return ir::lookup(a[0], a[1], sp());
    }
    if (name == "len") return ir::len(callArgs(1, name)[0], sp());
    if (name == "tovec") return ir::toVec(callArgs(1, name)[0], sp());
    if (name == "result") return ir::result(callArgs(1, name)[0], sp());
    if (name == "broadcast") return ir::broadcast(callArgs(1, name)[0], sp());
    if (name == "sort") {
      auto a = callArgs(2, name);
      return ir::sort(a[0], a[1], sp());
    }
    if (name == "merge") {
      auto a = callArgs(2, name);
      return ir::merge(a[0], a[1], sp());
    }
    if (name == "min" || name == "max") {
      auto a = callArgs(2, name);
      return ir::binary(name == "min" ? BinOp::Min : BinOp::Max, a[0], a[1], sp());
    }
    if (name == "sqrt") return ir::unary(UnaryOp::Sqrt, callArgs(1, name)[0], sp());
    if (name == "exp") return ir::unary(UnaryOp::Exp, callArgs(1, name)[0], sp());
    if (name == "log") return ir::unary(UnaryOp::Log, callArgs(1, name)[0], sp());
    if (name == "abs") return ir::unary(UnaryOp::Abs, callArgs(1, name)[0], sp());
    // Plain identifier followed by an application.
    return ir::ident(name, sp());
  }

  ExprPtr ifForm(std::uint32_t begin) {
    advance();
    expect(Tok::LParen, "'('");
    ExprPtr cond = expr();
    if (accept(Tok::Comma)) {
      ExprPtr t = expr();
      expect(Tok::Comma, "','");
      ExprPtr f = expr();
      expect(Tok::RParen, "')'");
      return ir::ifThen(cond, t, f, spanFrom(begin));
    }
    expect(Tok::RParen, "')'");
    ExprPtr t = expr();
    if (!atIdent("else")) fail("expected 'else'", "else");
    advance();
    ExprPtr f = expr();
    return ir::ifThen(cond, t, f, spanFrom(begin));
  }

  ir::Iter iterElem() {
    ir::Iter it;
    if (at(Tok::Ident) && peek(1).kind == Tok::LParen &&
        (peek().text == "iter" || peek().text == "simditer" || peek().text == "fringeiter")) {
      std::string name = advance().text;
      it.kind = name == "iter" ? IterKind::Scalar : name == "simditer" ? IterKind::Simd : IterKind::Fringe;
      expect(Tok::LParen, "'('");
      auto args = exprList(Tok::RParen, false);
      if (args.size() == 4) {
        it.start = args[1];
        it.end = args[2];
        it.stride = args[3];
      } else if (args.size() != 1) {
        throw ParseError(name + " takes 1 or 4 arguments", toks_[pos_ - 1].span);
      }
      it.data = args[0];
      return it;
    }
    it.data = expr();
    return it;
  }

  ExprPtr forForm(std::uint32_t begin) {
    advance();
    expect(Tok::LParen, "'('");
    std::vector<ir::Iter> iters;
    if (accept(Tok::LBrace)) {
      do {
        iters.push_back(iterElem());
      } while (accept(Tok::Comma));
      expect(Tok::RBrace, "'}'");
    } else {
      iters.push_back(iterElem());
    }
    expect(Tok::Comma, "','");
    ExprPtr init = expr();
    expect(Tok::Comma, "','");
    auto funcBegin = startOf();
    ExprPtr func = expr();
    expect(Tok::RParen, "')'");
    if (func->kind == ExprKind::Lambda && func->params.size() != 3)
      throw ParseError("for-loop function must take (builders, index, element)", spanFrom(funcBegin));
    Span span = spanFrom(begin);
    return build(span, [&] { return ir::forLoop(std::move(iters), init, func, span); });
  }

  ExprPtr callForm(std::uint32_t begin) {
    advance();
    expect(Tok::LParen, "'('");
    std::string fn = expect(Tok::Ident, "function name").text;
    std::vector<ExprPtr> args;
    if (accept(Tok::Comma)) {
      args = exprList(Tok::RParen, false);
    } else {
      expect(Tok::RParen, "')'");
    }
    return ir::externCall(std::move(fn), std::move(args), spanFrom(begin));
  }

  std::optional<BinOp> mergeOpAhead() {
    if (accept(Tok::Plus)) return BinOp::Add;
    if (accept(Tok::Star)) return BinOp::Mul;
    if (at(Tok::Ident) && (peek().text == "min" || peek().text == "max") &&
        (peek(1).kind == Tok::Comma || peek(1).kind == Tok::RBracket)) {
      return advance().text == "min" ? BinOp::Min : BinOp::Max;
    }
    return std::nullopt;
  }

  BinOp mergeOp() {
    auto op = mergeOpAhead();
    if (!op) fail("expected merge operator (+, *, min, max)", "merge operator");
    return *op;
  }

  // Optional explicit identity after the op; it must be the derived one.
  void identityArg(IrType& elem, BinOp op) {
    if (!accept(Tok::Comma)) return;
    auto begin = startOf();
    bool neg = accept(Tok::Minus);
    if (!at(Tok::Int) && !at(Tok::Float)) fail("expected identity literal", "literal");
    ExprPtr lit = literal(neg, begin);
    ScalarKind k = literalKind(lit->lit);
    if (!elem.valid() || elem.isHole()) elem = IrType::scalar(k);
    if (!elem.isScalar() || elem.scalarKind() != k || !literalEquals(lit->lit, mergeIdentity(k, op)))
      throw ParseError("explicit identity does not match the identity of '" +
                           std::string(binOpSymbol(op)) + "'",
                       lit->span);
  }

  BuilderKind builderArgs(BuilderTag tag) {
    expect(Tok::LBracket, "'['");
    BuilderKind k;
    k.tag = tag;
    switch (tag) {
      case BuilderTag::VecBuilder: k.a = type(); break;
      case BuilderTag::Merger:
      case BuilderTag::VecMerger: {
        if (auto op = mergeOpAhead()) {
          k.op = *op;
          k.a = IrType::hole();
        } else {
          k.a = type();
          expect(Tok::Comma, "','");
          k.op = mergeOp();
        }
        identityArg(k.a, k.op);
        break;
      }
      case BuilderTag::DictMerger:
        k.a = type();
        expect(Tok::Comma, "','");
        k.b = type();
        expect(Tok::Comma, "','");
        k.op = mergeOp();
        break;
      case BuilderTag::GroupBuilder:
        k.a = type();
        expect(Tok::Comma, "','");
        k.b = type();
        break;
    }
    expect(Tok::RBracket, "']'");
    return k;
  }

  ExprPtr builderCtor(BuilderTag tag, std::uint32_t begin) {
    advance();
    BuilderKind kind = builderArgs(tag);
    ExprPtr arg;
    if (tag == BuilderTag::VecMerger) {
      expect(Tok::LParen, "'('");
      arg = expr();
      expect(Tok::RParen, "')'");
    } else if (tag == BuilderTag::VecBuilder && accept(Tok::LParen)) {
      arg = expr();
      expect(Tok::RParen, "')'");
    }
    return ir::newBuilder(std::move(kind), std::move(arg), spanFrom(begin));
  }

  IrType type() {
    DepthGuard guard(*this);
    if (accept(Tok::Question)) {
      if (at(Tok::Int) && peek().span.begin == toks_[pos_ - 1].span.end) advance();
      return IrType::hole();
    }
    if (accept(Tok::LBrace)) {
      std::vector<IrType> fields;
      do {
        fields.push_back(type());
      } while (accept(Tok::Comma));
      expect(Tok::RBrace, "'}'");
      return IrType::structure(std::move(fields));
    }
    if (accept(Tok::LParen)) {
      std::vector<IrType> ps;
      if (!at(Tok::RParen)) {
        do {
          ps.push_back(type());
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'=>'");
      IrType ret = type();
      return IrType::function(std::move(ps), std::move(ret));
    }
    const Token& t = expect(Tok::Ident, "type");
    if (auto k = scalarNamed(t.text)) return IrType::scalar(*k);
    if (auto tag = builderTagNamed(t.text)) return IrType::builder(builderArgs(*tag));
    if (t.text == "vec") {
      expect(Tok::LBracket, "'['");
      IrType e = type();
      expect(Tok::RBracket, "']'");
      return IrType::vec(std::move(e));
    }
    if (t.text == "simd") {
      expect(Tok::LBracket, "'['");
      auto at0 = startOf();
      IrType e = type();
      expect(Tok::RBracket, "']'");
      if (!e.isScalar()) throw ParseError("simd element must be a scalar", spanFrom(at0));
      return IrType::simd(e.scalarKind());
    }
    if (t.text == "dict") {
      expect(Tok::LBracket, "'['");
      IrType k = type();
      expect(Tok::Comma, "','");
      IrType v = type();
      expect(Tok::RBracket, "']'");
      return IrType::dict(std::move(k), std::move(v));
    }
    throw ParseError("unknown type '" + t.text + "'", t.span, "type");
  }

  std::string_view src_;
  ParseOptions opts_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

inline int treeDepth(const ExprPtr& root, int limit) {
  // Iterative so that hostile input cannot exhaust the stack here.
  std::vector<std::pair<const Expr*, int>> stack{{root.get(), 1}};
  int best = 0;
  while (!stack.empty()) {
    auto [e, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (best > limit) return best;
    for (const auto& k : e->kids) stack.push_back({k.get(), d + 1});
  }
  return best;
}

}  // namespace detail

inline ExprPtr parse(std::string_view src, const ParseOptions& opts) {
  if (src.size() > opts.maxLength)
    throw ParseError("program exceeds " + std::to_string(opts.maxLength) + " bytes",
                     {static_cast<std::uint32_t>(opts.maxLength), static_cast<std::uint32_t>(opts.maxLength)});
  detail::Parser p(src, opts);
  ExprPtr e = p.program();
  if (detail::treeDepth(e, opts.maxDepth * 4) > opts.maxDepth * 4)
    throw ParseError("expression nested too deeply", e->span);
  return e;
}

inline IrType parseType(std::string_view src) {
  detail::Parser p(src, ParseOptions{});
  return p.typeOnly();
}

inline Literal mergeIdentity(ScalarKind k, BinOp op) {
  auto pick = [&](auto zero, auto one, auto lo, auto hi) -> Literal {
    switch (op) {
      case BinOp::Add: return zero;
      case BinOp::Mul: return one;
      case BinOp::Min: return hi;
      case BinOp::Max: return lo;
      default: return zero;
    }
  };
  switch (k) {
    case ScalarKind::Bool: return pick(false, true, false, true);
    case ScalarKind::I32:
      return pick(std::int32_t{0}, std::int32_t{1}, std::numeric_limits<std::int32_t>::min(),
                  std::numeric_limits<std::int32_t>::max());
    case ScalarKind::I64:
      return pick(std::int64_t{0}, std::int64_t{1}, std::numeric_limits<std::int64_t>::min(),
                  std::numeric_limits<std::int64_t>::max());
    case ScalarKind::F32:
      return pick(0.0f, 1.0f, -std::numeric_limits<float>::infinity(), std::numeric_limits<float>::infinity());
    case ScalarKind::F64:
      return pick(0.0, 1.0, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  }
  return std::int64_t{0};
}

}  // namespace weldmill
