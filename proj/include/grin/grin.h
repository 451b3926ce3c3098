/* SPDX-License-Identifier: Apache-2.0 */
/* C API for the grin polymer graph-learning library. All functions return a
 * grin_status; on failure grin_last_error() describes the problem for the
 * calling thread. Handles are opaque and freed with the matching *_free. */
#ifndef GRIN_GRIN_H
#define GRIN_GRIN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum grin_status {
  GRIN_OK = 0,
  GRIN_ERR_SYNTAX = 1,
  GRIN_ERR_ANCHOR = 2,
  GRIN_ERR_CONNECTIVITY = 3,
  GRIN_ERR_SHAPE = 4,
  GRIN_ERR_IO = 5,
  GRIN_ERR_USAGE = 6,
  GRIN_ERR_CHECK_FAILED = 7,
  GRIN_ERR_INTERNAL = 8
} grin_status;

/* Message for the last failure on this thread; empty string if none. */
const char* grin_last_error(void);

uint32_t grin_api_version(void);

/* ---- repeat units -------------------------------------------------- */

typedef struct grin_repeat_unit grin_repeat_unit;

grin_status grin_parse_repeat_unit(const char* text, grin_repeat_unit** out);
void grin_repeat_unit_free(grin_repeat_unit* ru);
int grin_repeat_unit_num_atoms(const grin_repeat_unit* ru);
int grin_repeat_unit_num_bonds(const grin_repeat_unit* ru);
/* Writes the canonical serialization; returns required length (excluding
 * the terminator) via *len. buf may be NULL to query the length. */
grin_status grin_canonical_text(const grin_repeat_unit* ru, char* buf,
                                size_t buflen, size_t* len);

/* ---- polymer graphs ------------------------------------------------ */

typedef struct grin_graph grin_graph;

grin_status grin_chain_repeat(const grin_repeat_unit* ru, int n,
                              grin_graph** out);
void grin_graph_free(grin_graph* g);
int grin_graph_num_nodes(const grin_graph* g);
int grin_graph_num_edges(const grin_graph* g);
grin_status grin_graph_diameter(const grin_graph* g, int* out);
/* One JSON Lines record, same convention as the batch files. */
grin_status grin_graph_to_json(const grin_graph* g, char* buf, size_t buflen,
                               size_t* len);

/* ---- command-level entry points (the CLI surface) ------------------ */

/* sizes_csv is a comma-separated list, e.g. "1,3". */
grin_status grin_cmd_augment(const char* input_csv, const char* sizes_csv,
                             double ratio, uint64_t seed, const char* out_path);

grin_status grin_cmd_synth(int count, uint64_t seed, const char* out_csv);

/* cfg_path: key = value lines; see the README for keys. history_csv may be
 * NULL to skip writing the per-epoch history. */
grin_status grin_cmd_train(const char* data_jsonl, const char* cfg_path,
                           const char* ckpt_out, const char* history_csv);

grin_status grin_cmd_eval(const char* ckpt_path, const char* test_csv,
                          const char* sizes_csv, const char* report_json_out);

grin_status grin_cmd_embed(const char* ckpt_path, const char* ru_text,
                           const char* sizes_csv, const char* out_csv);

/* prop: "invariance", "gradsum" or "mst"; params_json holds the knobs for
 * the chosen property. Returns GRIN_ERR_CHECK_FAILED when the property does
 * not hold. */
grin_status grin_cmd_verify_theory(const char* prop, const char* params_json,
                                   const char* report_json_out);

/* graph_json: {"n": <nodes>, "edges": [[u, v, w], ...]} */
grin_status grin_cmd_mst(const char* graph_json_path, int start,
                         const char* out_json);

/* Finite-difference gradient check over `trials` random model instances;
 * GRIN_ERR_CHECK_FAILED if any exceeds the relative tolerance. */
grin_status grin_cmd_gradcheck(int trials, uint64_t seed, double rel_tol,
                               char* summary, size_t summary_len);

#ifdef __cplusplus
}
#endif

#endif /* GRIN_GRIN_H */
