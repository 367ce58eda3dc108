#include "jellium/cli.hpp"

namespace jellium::cli {

namespace {

// Kept in step with the hand-written validator in config.cpp, which is the
// authority and also reports JSON pointers.
constexpr const char* kSchema = R"json({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "jellium experiment",
  "type": "object",
  "required": ["experiment", "seed", "params"],
  "additionalProperties": false,
  "properties": {
    "experiment": {"enum": ["SampleGas", "SampleLimit", "RenyiCheck", "TailScan", "DominanceCheck",
                            "GumbelCheck", "ConvergenceTable", "PartitionEstimate"]},
    "seed": {"type": "integer", "minimum": 0, "maximum": 18446744073709551615},
    "output_dir": {"type": "string", "minLength": 1, "default": "results"},
    "parallelism": {"type": "integer", "minimum": 1, "maximum": 256, "default": 1},
    "chunk": {"type": "integer", "minimum": 1, "default": 10000,
              "description": "samples per task; task t draws from the stream (seed, t)"},
    "params": {"type": "object"}
  },
  "allOf": [
    {"if": {"properties": {"experiment": {"const": "SampleGas"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/sample_gas"}}}},
    {"if": {"properties": {"experiment": {"const": "SampleLimit"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/sample_limit"}}}},
    {"if": {"properties": {"experiment": {"const": "RenyiCheck"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/renyi_check"}}}},
    {"if": {"properties": {"experiment": {"const": "TailScan"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/tail_scan"}}}},
    {"if": {"properties": {"experiment": {"const": "DominanceCheck"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/dominance_check"}}}},
    {"if": {"properties": {"experiment": {"const": "GumbelCheck"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/gumbel_check"}}}},
    {"if": {"properties": {"experiment": {"const": "ConvergenceTable"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/convergence_table"}}}},
    {"if": {"properties": {"experiment": {"const": "PartitionEstimate"}}},
     "then": {"properties": {"params": {"$ref": "#/$defs/partition_estimate"}}}}
  ],
  "$defs": {
    "knots": {"type": "array", "minItems": 2,
              "items": {"type": "array", "prefixItems": [{"type": "number"}, {"type": "number", "minimum": 0}],
                        "minItems": 2, "maxItems": 2}},
    "background": {
      "type": "object", "required": ["variant", "params", "alpha"], "additionalProperties": false,
      "properties": {
        "variant": {"enum": ["UniformInterval", "GammaFamily", "FixedDensity"]},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "scale": {"type": "number", "exclusiveMinimum": 0, "default": 1},
        "params": {"oneOf": [
          {"type": "object", "required": ["a", "b"], "additionalProperties": false,
           "properties": {"a": {"type": "number"}, "b": {"type": "number"}}},
          {"type": "object", "required": ["n", "gamma"], "additionalProperties": false,
           "properties": {"n": {"type": "integer", "minimum": 1}, "gamma": {"type": "number", "exclusiveMinimum": 1}}},
          {"type": "object", "required": ["knots"], "additionalProperties": false,
           "properties": {"knots": {"$ref": "#/$defs/knots"}}}
        ]}
      }
    },
    "gas": {
      "required": ["n", "beta", "background"],
      "properties": {
        "n": {"type": "integer", "minimum": 1, "maximum": 10000},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "background": {"$ref": "#/$defs/background"}
      },
      "description": "the Gibbs measure exists if and only if alpha > n - 1"
    },
    "family": {
      "type": "object", "required": ["variant"],
      "properties": {
        "variant": {"enum": ["HalfWell", "SquaredZero", "SquaredGamma"]},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "gamma": {"type": "number", "exclusiveMinimum": 1}
      },
      "oneOf": [
        {"properties": {"variant": {"enum": ["HalfWell", "SquaredZero"]}}, "required": ["lambda"]},
        {"properties": {"variant": {"const": "SquaredGamma"}}, "required": ["gamma"]}
      ]
    },
    "strategy": {"enum": ["auto", "rejection", "gibbs", "transfer"]},
    "source": {
      "type": "object", "required": ["family", "beta"], "additionalProperties": false,
      "properties": {
        "family": {"$ref": "#/$defs/family"},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "depth": {"type": "integer", "minimum": 1,
                  "description": "conditioning depth m; omit for the exact infinite half-well"},
        "eps": {"type": "number", "exclusiveMinimum": 0, "default": 1e-8},
        "strategy": {"$ref": "#/$defs/strategy"},
        "max_attempts": {"type": "integer", "minimum": 1},
        "burn_in": {"type": "integer", "minimum": 0},
        "thin": {"type": "integer", "minimum": 1},
        "grid_points": {"type": "integer", "minimum": 3}
      }
    },
    "sample_gas": {
      "allOf": [{"$ref": "#/$defs/gas"}],
      "properties": {
        "samples": {"type": "integer", "minimum": 1},
        "method": {"enum": ["auto", "rejection", "gibbs"]},
        "burn_in": {"type": "integer", "minimum": 0},
        "thin": {"type": "integer", "minimum": 1},
        "max_attempts": {"type": "integer", "minimum": 1}
      }
    },
    "sample_limit": {
      "type": "object", "required": ["source"],
      "properties": {"source": {"$ref": "#/$defs/source"}, "k": {"type": "integer", "minimum": 1},
                     "samples": {"type": "integer", "minimum": 1}}
    },
    "renyi_check": {
      "allOf": [{"$ref": "#/$defs/gas"}],
      "properties": {
        "k": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "strategy": {"enum": ["sign_restricted", "plain_rejection"]},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "max_attempts": {"type": "integer", "minimum": 1}
      }
    },
    "tail_scan": {
      "type": "object", "required": ["source"],
      "properties": {
        "source": {"$ref": "#/$defs/source"},
        "gamma_hypothesis": {"type": "number", "exclusiveMinimum": 0, "default": 1},
        "samples": {"type": "integer", "minimum": 1},
        "window": {"type": "object", "properties": {
          "survival_lo": {"type": "number", "default": 1e-4},
          "survival_hi": {"type": "number", "default": 0.1}}}
      }
    },
    "dominance_check": {
      "type": "object", "required": ["p", "q"],
      "properties": {
        "p": {"$ref": "#/$defs/source"}, "q": {"$ref": "#/$defs/source"},
        "coordinate": {"type": "integer", "minimum": 1, "default": 1},
        "samples": {"type": "integer", "minimum": 1},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
      }
    },
    "gumbel_check": {
      "type": "object",
      "properties": {
        "chi": {"type": "number", "exclusiveMinimum": 0, "default": 200},
        "samples": {"type": "integer", "minimum": 1},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 0.02}
      }
    },
    "convergence_table": {
      "type": "object", "required": ["regime", "beta"],
      "properties": {
        "regime": {"enum": ["AsymptoticallyNeutral", "Nonneutral", "FixedBackground"]},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "gamma": {"type": "number", "exclusiveMinimum": 1},
        "alpha_ratio": {"type": "number", "exclusiveMinimum": 1},
        "rho": {"$ref": "#/$defs/knots"},
        "k": {"type": "integer", "minimum": 1},
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 10000}, "minItems": 1},
        "samples": {"type": "integer", "minimum": 1},
        "limit_depth": {"type": "integer", "minimum": 1, "default": 512},
        "halfwell_eps": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "burn_in": {"type": "integer", "minimum": 0},
        "thin": {"type": "integer", "minimum": 1},
        "limit_strategy": {"$ref": "#/$defs/strategy"},
        "grid_points": {"type": "integer", "minimum": 3}
      }
    },
    "partition_estimate": {
      "allOf": [{"$ref": "#/$defs/gas"}],
      "properties": {"samples": {"type": "integer", "minimum": 1}}
    }
  }
})json";

}  // namespace

Json schema() { return Json::parse(kSchema); }

}  // namespace jellium::cli
