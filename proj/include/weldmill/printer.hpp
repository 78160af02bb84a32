#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "weldmill/expr.hpp"

namespace weldmill {

std::string print(const ExprPtr& e);

namespace detail {

inline std::string floatText(double v, int digits, const char* suffix) {
  if (std::isnan(v)) return std::string("(0.0") + suffix + " / 0.0" + suffix + ")";
  if (std::isinf(v)) return std::string(v < 0 ? "-1e999" : "1e999") + suffix;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  std::string s = buf;
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s + suffix;
}

inline std::string literalText(const Literal& l) {
  switch (literalKind(l)) {
    case ScalarKind::Bool: return std::get<bool>(l) ? "true" : "false";
    case ScalarKind::I32: return std::to_string(std::get<std::int32_t>(l)) + "si32";
    case ScalarKind::I64: return std::to_string(std::get<std::int64_t>(l));
    case ScalarKind::F32: return floatText(std::get<float>(l), 9, "f");
    case ScalarKind::F64: return floatText(std::get<double>(l), 17, "");
  }
  return "?";
}

class Printer {
 public:
  std::string out;

  void expr(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Literal: out += literalText(e->lit); break;
      case ExprKind::Ident: out += e->name; break;
      case ExprKind::Let:
        out += e->name;
        out += " := ";
        wrapIf(e->kids[0], e->kids[0]->kind == ExprKind::Let);
        out += "; ";
        expr(e->kids[1]);
        break;
      case ExprKind::Lambda:
        out += "(";
        for (std::size_t i = 0; i < e->params.size(); ++i) {
          if (i) out += ", ";
          out += e->params[i].name;
          if (e->params[i].type.valid()) {
            out += ": ";
            out += e->params[i].type.str();
          }
        }
        out += ") => ";
        expr(e->kids[0]);
        break;
      case ExprKind::Apply:
        postfixBase(e->kids[0]);
        out += "(";
        list(e->kids, 1);
        out += ")";
        break;
      case ExprKind::Binary:
        if (e->binop == BinOp::Min || e->binop == BinOp::Max) {
          call(binOpSymbol(e->binop), e);
        } else {
          out += "(";
          operand(e->kids[0]);
          out += " ";
          out += binOpSymbol(e->binop);
          out += " ";
          operand(e->kids[1]);
          out += ")";
        }
        break;
      case ExprKind::Unary:
        if (e->unop == UnaryOp::Neg || e->unop == UnaryOp::Not) {
          out += unaryOpName(e->unop);
          out += "(";
          expr(e->kids[0]);
          out += ")";
        } else {
          call(unaryOpName(e->unop), e);
        }
        break;
      case ExprKind::If: call("if", e); break;
      case ExprKind::BitSelect: call("bitselect", e); break;
      case ExprKind::Iterate: call("iterate", e); break;
      case ExprKind::Lookup: call("lookup", e); break;
      case ExprKind::GetField:
        postfixBase(e->kids[0]);
        out += ".";
        out += std::to_string(e->index);
        break;
      case ExprKind::Len: call("len", e); break;
      case ExprKind::Sort: call("sort", e); break;
      case ExprKind::ToVec: call("tovec", e); break;
      case ExprKind::MakeStruct:
        out += "{";
        list(e->kids, 0);
        out += "}";
        break;
      case ExprKind::MakeVector:
        out += "[";
        list(e->kids, 0);
        out += "]";
        break;
      case ExprKind::NewBuilder:
        out += e->builder.str();
        if (!e->kids.empty()) {
          out += "(";
          expr(e->kids[0]);
          out += ")";
        }
        break;
      case ExprKind::Merge: call("merge", e); break;
      case ExprKind::Result: call("result", e); break;
      case ExprKind::For: forLoop(*e); break;
      case ExprKind::ExternCall:
        out += "call(";
        out += e->name;
        for (const auto& k : e->kids) {
          out += ", ";
          expr(k);
        }
        out += ")";
        break;
      case ExprKind::Broadcast: call("broadcast", e); break;
      case ExprKind::Cast: call(scalarName(e->castTo), e); break;
      case ExprKind::Sugar: call(sugarName(e->sugar), e); break;
    }
  }

 private:
  void call(const char* name, const ExprPtr& e) {
    out += name;
    out += "(";
    list(e->kids, 0);
    out += ")";
  }

  void list(const std::vector<ExprPtr>& xs, std::size_t from) {
    for (std::size_t i = from; i < xs.size(); ++i) {
      if (i > from) out += ", ";
      expr(xs[i]);
    }
  }

  void wrapIf(const ExprPtr& e, bool wrap) {
    if (wrap) out += "(";
    expr(e);
    if (wrap) out += ")";
  }

  void operand(const ExprPtr& e) { wrapIf(e, e->kind == ExprKind::Let || e->kind == ExprKind::Lambda); }

  void postfixBase(const ExprPtr& e) {
    bool wrap = e->kind == ExprKind::Literal || e->kind == ExprKind::Let || e->kind == ExprKind::Lambda ||
                (e->kind == ExprKind::Unary && (e->unop == UnaryOp::Neg || e->unop == UnaryOp::Not));
    wrapIf(e, wrap);
  }

  void iter(const Expr& e, std::size_t i) {
    const IterMeta& m = e.iters[i];
    if (m.kind == IterKind::Scalar && !m.ranged) {
      expr(e.iterData(i));
      return;
    }
    out += m.kind == IterKind::Scalar ? "iter(" : m.kind == IterKind::Simd ? "simditer(" : "fringeiter(";
    expr(e.iterData(i));
    if (m.ranged) {
      out += ", ";
      expr(e.iterStart(i));
      out += ", ";
      expr(e.iterEnd(i));
      out += ", ";
      expr(e.iterStride(i));
    }
    out += ")";
  }

  void forLoop(const Expr& e) {
    out += "for(";
    bool braces = e.iters.size() > 1 || e.iterData(0)->kind == ExprKind::MakeStruct;
    if (braces) out += "{";
    for (std::size_t i = 0; i < e.iters.size(); ++i) {
      if (i) out += ", ";
      iter(e, i);
    }
    if (braces) out += "}";
    out += ", ";
    expr(e.forInit());
    out += ", ";
    expr(e.forFunc());
    out += ")";
  }
};

}  // namespace detail

inline std::string print(const ExprPtr& e) {
  detail::Printer p;
  p.expr(e);
  return std::move(p.out);
}

}  // namespace weldmill
