#pragma once

// Persistent forms of fields and operators.
//
// Binary container (all integers little-endian):
//   bytes 0..3   magic "DYFC"
//   u32          version (1)
//   u32          kind (0 = field, 1 = block list)
//   u32 n, u32 L, u32 d
//   u32 depth    shift stream depth, 0 for the standard grid
//   depth*n u8   shift bits beta_j[i], level-major
//   kind 0:      2^{Ln} cells in flat order, each d x d matrix row-major as
//                (re, im) pairs of IEEE-754 binary64
//   kind 1:      u64 count, then count records (u64 row, u64 col, matrix)
//
// Operator manifest: a JSON object {"format": "dyadic-operator",
// "version": 1, "kind": "perfect" | "tensor" | "shift", ...} whose payload
// files sit next to it and are named in the "payload" member.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <variant>

#include <json.hpp>

#include "dyadic/matrix_field.hpp"
#include "dyadic/perfect.hpp"
#include "dyadic/shift.hpp"
#include "dyadic/tensor.hpp"

namespace dyadic {

using BlockMap = std::map<HaarTensorOperator::Key, Mat>;

void write_field(std::ostream& out, const MatrixField& f);
/// Throws FormatError on a bad header or truncated payload.
MatrixField read_field(std::istream& in);

void write_blocks(std::ostream& out, const GridHandle& grid, int d, const BlockMap& blocks);

struct BlockPayload {
    GridHandle grid;
    int d = 0;
    BlockMap blocks;
};
BlockPayload read_blocks(std::istream& in);

/// {"n", "L", "d", "shift": [bit lines] | null, "cells": [[[re, im], ...], ...]}
/// with each cell's entries row-major.
nlohmann::json field_to_json(const MatrixField& f);
MatrixField field_from_json(const nlohmann::json& j);

using OperatorVariant = std::variant<PerfectDyadicCZO, HaarTensorOperator, DyadicShift>;

/// Writes `manifest` and its payload files `<stem>.<part>.dyfc`.
void save_operator(const std::filesystem::path& manifest, const OperatorVariant& op);
OperatorVariant load_operator(const std::filesystem::path& manifest);

} // namespace dyadic
