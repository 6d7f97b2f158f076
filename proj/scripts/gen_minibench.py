#!/usr/bin/env python3
"""Regenerates the MiniBench fixture: manifest, workspace templates, and the
scripted repairing-backend profile. Keeps byte spans and fix strings in sync.

Usage: python3 scripts/gen_minibench.py
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
BENCH = ROOT / "benchmarks" / "minibench"
PROFILES = ROOT / "profiles"

BUGS = [
    {
        "id": "off_by_one_sum",
        "buggy": "fn sum(n){s=0;i=0;while(i<n-1){i=i+1;s=s+i;}return s;}",
        "fixed": "fn sum(n){s=0;i=0;while(i<n){i=i+1;s=s+i;}return s;}",
        "signature": "fn sum(n)",
        "driver": "fn main(){print(sum(read()));}",
        "tags": ["loop", "off-by-one"],
        "tests": [("n5", "5", "15"), ("n1", "1", "1"), ("n0", "0", "0")],
    },
    {
        "id": "min_instead_of_max",
        "buggy": "fn max2(a,b){if(a<b){return a;}return b;}",
        "fixed": "fn max2(a,b){if(a<b){return b;}return a;}",
        "signature": "fn max2(a,b)",
        "driver": "fn main(){print(max2(read(),read()));}",
        "tags": ["branch"],
        "tests": [("first_smaller", "3 9", "9"), ("first_larger", "7 2", "7"),
                  ("equal", "4 4", "4")],
    },
    {
        "id": "zero_init_product",
        "buggy": "fn fact(n){r=0;i=1;while(i<=n){r=r*i;i=i+1;}return r;}",
        "fixed": "fn fact(n){r=1;i=1;while(i<=n){r=r*i;i=i+1;}return r;}",
        "signature": "fn fact(n)",
        "driver": "fn main(){print(fact(read()));}",
        "tags": ["initialization"],
        "tests": [("five", "5", "120"), ("zero", "0", "1"), ("one", "1", "1")],
    },
    {
        "id": "loop_bound_bitcount",
        "buggy": "fn bits(n){c=0;while(n>1){c=c+n%2;n=n/2;}return c;}",
        "fixed": "fn bits(n){c=0;while(n>0){c=c+n%2;n=n/2;}return c;}",
        "signature": "fn bits(n)",
        "driver": "fn main(){print(bits(read()));}",
        "tags": ["loop"],
        "tests": [("five", "5", "2"), ("eight", "8", "1"), ("zero", "0", "0"),
                  ("one", "1", "1")],
    },
    {
        "id": "negated_abs",
        "buggy": "fn abs(x){if(x<0){return x;}return 0-x;}",
        "fixed": "fn abs(x){if(x<0){return 0-x;}return x;}",
        "signature": "fn abs(x)",
        "driver": "fn main(){print(abs(read()));}",
        "tags": ["branch", "sign"],
        "tests": [("neg", "-3", "3"), ("pos", "5", "5"), ("zero", "0", "0")],
    },
    {
        "id": "gcd_state_clobber",
        "buggy": "fn gcd(a,b){while(b!=0){t=b;b=a%b;a=b;}return a;}",
        "fixed": "fn gcd(a,b){while(b!=0){t=b;b=a%b;a=t;}return a;}",
        "signature": "fn gcd(a,b)",
        "driver": "fn main(){print(gcd(read(),read()));}",
        "tags": ["state"],
        "tests": [("twelve_eight", "12 8", "4"), ("coprime", "7 3", "1"),
                  ("b_zero", "9 0", "9")],
    },
    {
        "id": "min3_wrong_compare",
        "buggy": "fn min3(a,b,c){m=a;if(b<m){m=b;}if(c<b){m=c;}return m;}",
        "fixed": "fn min3(a,b,c){m=a;if(b<m){m=b;}if(c<m){m=c;}return m;}",
        "signature": "fn min3(a,b,c)",
        "driver": "fn main(){print(min3(read(),read(),read()));}",
        "tags": ["branch"],
        "tests": [("ordered", "1 5 3", "1"), ("middle", "4 2 6", "2"),
                  ("third", "9 9 1", "1"), ("all_equal", "7 7 7", "7")],
    },
    {
        "id": "parity_flip_evensum",
        "buggy": "fn evensum(n){s=0;i=0;while(i<=n){if(i%2==1){s=s+i;}i=i+1;}return s;}",
        "fixed": "fn evensum(n){s=0;i=0;while(i<=n){if(i%2==0){s=s+i;}i=i+1;}return s;}",
        "signature": "fn evensum(n)",
        "driver": "fn main(){print(evensum(read()));}",
        "tags": ["parity"],
        "tests": [("six", "6", "12"), ("one", "1", "0"), ("zero", "0", "0")],
    },
]


def write_benchmark():
    manifest = {
        "benchmark_id": "minibench",
        "language": "minilang",
        "version": "1",
        "bugs": [],
    }
    for bug in BUGS:
        ws = BENCH / "workspaces" / bug["id"]
        ws.mkdir(parents=True, exist_ok=True)
        program = bug["buggy"] + "\n" + bug["driver"] + "\n"
        (ws / "program.ml").write_bytes(program.encode())
        manifest["bugs"].append({
            "id": bug["id"],
            "buggy_code": bug["buggy"],
            "function_signature": bug["signature"],
            "ground_truth_fix": bug["fixed"],
            "workspace_template": f"workspaces/{bug['id']}",
            "target_file": "program.ml",
            "target_span": [0, len(bug["buggy"].encode())],
            "tags": bug["tags"],
            "test_spec": {
                "kind": "minilang",
                "timeout_seconds": 10,
                "test_cases": [
                    {"name": n, "stdin": s, "expected_output": e}
                    for (n, s, e) in bug["tests"]
                ],
            },
        })
    BENCH.mkdir(parents=True, exist_ok=True)
    (BENCH / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# Scripted responses per bug keyed on the function signature (present in every
# backward prompt). Mix of clean fixes, fenced fixes, prose-wrapped fixes,
# still-buggy echoes, partial functions, and no-code answers.
def backward_responses(bug):
    b, f = bug["buggy"], bug["fixed"]
    sig = bug["signature"]
    by_id = {
        "off_by_one_sum": [
            "```\n" + f + "\n```",
            b,
            "Here is the function:\n" + f + "\nHope this helps!",
            sig + "{",
            "I cannot help with that.",
        ],
        "min_instead_of_max": [
            f,
            b,
            f,
            "return b;",
            "fn max2(a,b){return a+b;}",
        ],
        "zero_init_product": [
            f,
            b,
            "garbage {",
            f,
            "The factorial of n.",
        ],
        "loop_bound_bitcount": [
            b,
            "fn bits(n){return 0;}",
            "no code here",
            "fn bits(n){c=1;while(0){c=c+1;}return c;}",
            "fn bits(n){",
        ],
        "negated_abs": [
            f,
            "fn abs(x){return x;}",
            f,
            "nothing",
            b,
        ],
        "gcd_state_clobber": [
            "```minilang\n" + f + "\n```",
            b,
            "The fixed code follows.\n" + f + "\nEnjoy.",
            "fn gcd(a,b){return a;}",
            "x",
        ],
        "min3_wrong_compare": [
            b,
            "fn min3(a,b,c){return a;}",
            b,
            "hmm",
            "fn min3(a,b,c){",
        ],
        "parity_flip_evensum": [
            b,
            f,
            "fn evensum(n){return n;}",
            f,
            "",
        ],
    }
    return by_id[bug["id"]]


def write_scripted_profile():
    rules = [{
        "when_contains": "Create a Javadoc",
        "responses": ["Computes a small integer function of its input."],
    }]
    for bug in BUGS:
        rules.append({
            "when_contains": bug["signature"],
            "responses": backward_responses(bug),
        })
    profile = {
        "name": "scripted-repair",
        "style": "chat",
        "context_window": 4096,
        "seedable": True,
        "forward": {"temperature": 0.3, "top_p": 0.95, "num_beams": 1,
                    "num_samples": 5, "max_new_tokens": 256},
        "backward": {"temperature": 0.2, "top_p": 0.95, "num_beams": 1,
                     "num_samples": 5, "max_new_tokens": 256},
        "backend": {"kind": "scripted", "rules": rules},
    }
    PROFILES.mkdir(parents=True, exist_ok=True)
    (PROFILES / "scripted-repair.json").write_text(
        json.dumps(profile, indent=2) + "\n")


if __name__ == "__main__":
    write_benchmark()
    write_scripted_profile()
    print(f"wrote {BENCH / 'manifest.json'} and {PROFILES / 'scripted-repair.json'}")
