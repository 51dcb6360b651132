// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Benchmarks for `stmbus-core` live in `benches/`.
