#pragma once

// Umbrella header for the MiniPy language toolkit: tokens, AST, lexer,
// parser, canonical printer, and interpreter.

#include "mixcode/lang/ast.hpp"
#include "mixcode/lang/interpreter.hpp"
#include "mixcode/lang/lexer.hpp"
#include "mixcode/lang/parser.hpp"
#include "mixcode/lang/printer.hpp"
#include "mixcode/lang/token.hpp"
