#pragma once

// Convenience include pulling in the whole library.

#include "cohere/ast.hpp"
#include "cohere/checker.hpp"
#include "cohere/modes.hpp"
#include "cohere/overlap.hpp"
#include "cohere/parse.hpp"
#include "cohere/pretty.hpp"
#include "cohere/program.hpp"
#include "cohere/semantics.hpp"
#include "cohere/testkit.hpp"
#include "cohere/validity.hpp"
