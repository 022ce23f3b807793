"""Regenerates mini_cr.jsonl: 9 hand-written code-refinement samples (java).

Subwords imitate a byte-level BPE: identifiers split at camelCase and `_`,
operators one piece each, whitespace runs kept as their own pieces (they
overlap no code token and become orphan mass), and `()` as one piece that
straddles two tokens. Attention rows are seeded softmaxes with extra weight
on input pieces equal to the generated piece, stronger in later layers.

usage: python3 make_mini_cr.py > mini_cr.jsonl
"""
import json
import math
import random
import re

LAYERS = 3

SAMPLES = [
    # id, buggy source, fixed gold, prediction
    (
        "r1",
        "public int getCount(List<String> items) {\n    int count = 0;\n    return items.size();\n}",
        "public int getCount(List<String> items) {\n    int count = items.size();\n    return count;\n}",
        "public int getCount(List<String> items) {\n    int count = items.size();\n    return count;\n}",
    ),
    (
        "r2",
        "public boolean isEmpty(String value) {\n    return value.length() == 0;\n}",
        "public boolean isEmpty(String value) {\n    return value == null || value.length() == 0;\n}",
        "public void run() {\n    throw new UnsupportedOperationException();\n}",
    ),
    (
        "r3",
        "private static int max(int a, int b) {\n    if (a > b) {\n        return b;\n    }\n    return a;\n}",
        "private static int max(int a, int b) {\n    if (a > b) {\n        return a;\n    }\n    return b;\n}",
        "public void max() {\n    return;\n}",
    ),
    (
        "r4",
        "public void addAll(Collection<Item> source) {\n    for (Item item : source) {\n        this.items.add(item);\n    }\n}",
        "public void addAll(Collection<Item> source) {\n    if (source == null) {\n        return;\n    }\n    for (Item item : source) {\n        if (item != null) {\n            this.items.add(item);\n        }\n    }\n}",
        "public void addAll(Collection<Item> source) {\n    for (Item item : source) {\n        items.add(item);\n    }\n}",
    ),
    (
        "r5",
        "public String join(String[] parts) {\n    StringBuilder sb = new StringBuilder();\n    for (int i = 0; i <= parts.length; i++) {\n        sb.append(parts[i]);\n    }\n    return sb.toString();\n}",
        "public String join(String[] parts) {\n    StringBuilder sb = new StringBuilder();\n    for (int i = 0; i < parts.length; i++) {\n        sb.append(parts[i]);\n    }\n    return sb.toString();\n}",
        "public String join(String[] parts) {\n    StringBuilder sb = new StringBuilder();\n    for (int i = 0; i < parts.length; i++) {\n        sb.append(parts[i]);\n    }\n    return sb.toString();\n}",
    ),
    (
        "r6",
        "protected void close(InputStream in) {\n    try {\n        in.close();\n    } catch (IOException e) {\n    }\n}",
        "protected void close(InputStream in) {\n    if (in == null) {\n        return;\n    }\n    try {\n        in.close();\n    } catch (IOException e) {\n        LOG.warn(e);\n    }\n}",
        "protected void close(InputStream in) {\n    try {\n        in.close();\n    } catch (IOException e) {\n        e.printStackTrace();\n    }\n}",
    ),
    (
        "r7",
        "public double average(int[] values) {\n    int sum = 0;\n    for (int v : values) {\n        sum += v;\n    }\n    return sum / values.length;\n}",
        "public double average(int[] values) {\n    if (values.length == 0) {\n        return 0.0;\n    }\n    double sum = 0;\n    for (int v : values) {\n        sum += v;\n    }\n    return sum / values.length;\n}",
        "public double average(int[] values) {\n    double sum = 0;\n    for (int v : values) {\n        sum += v;\n    }\n    return sum / values.length;\n}",
    ),
    (
        "r8",
        "public Node find(Node root, int key) {\n    while (root != null && root.key != key) {\n        root = key < root.key ? root.right : root.left;\n    }\n    return root;\n}",
        "public Node find(Node root, int key) {\n    while (root != null && root.key != key) {\n        root = key < root.key ? root.left : root.right;\n    }\n    return root;\n}",
        "public Node find(Node root, int key) {\n    Node current = root;\n    while (current != null) {\n        current = current.next;\n    }\n    return null;\n}",
    ),
    (
        "r9",
        "public void setName(String name) {\n    name = name;\n}",
        "public void setName(String name) {\n    this.name = name;\n}",
        "public void setName(String name) {\n    this.name = name;\n}",
    ),
]

PIECE = re.compile(r"\(\)|[A-Z]?[a-z0-9]+|[A-Z]+(?![a-z])|_|\s+|==|!=|<=|>=|\+=|\+\+|&&|\|\||\S")


def pieces(text):
    return [(m.group(0), m.start(), m.end()) for m in PIECE.finditer(text)]


def output_steps(prediction):
    out = []
    prev_space = False
    for text, _, _ in pieces(prediction):
        if text.isspace():
            prev_space = True
            continue
        out.append(("Ġ" if prev_space else "") + text)
        prev_space = False
    return out


def softmax_row(rng, subwords, step_text, layer):
    key = step_text.lstrip("Ġ").lower()
    boost = [0.3, 1.5, 3.5][layer]
    logits = []
    for text, _, _ in subwords:
        z = rng.gauss(0.0, 1.0)
        if text.isspace():
            z -= 1.5
        if text.lower() == key:
            z += boost
        logits.append(z)
    m = max(logits)
    ex = [math.exp(z - m) for z in logits]
    total = sum(ex)
    row = [round(e / total, 5) for e in ex]
    top = max(range(len(row)), key=lambda i: row[i])
    row[top] = round(row[top] + 1.0 - sum(row), 5)
    return row


def main():
    rng = random.Random(20240611)
    for sid, source, gold, prediction in SAMPLES:
        subwords = pieces(source)
        steps = output_steps(prediction)
        attention = [
            [softmax_row(rng, subwords, step, layer) for step in steps] for layer in range(LAYERS)
        ]
        record = {
            "id": sid,
            "task": "CR",
            "source_language": "java",
            "source_text": source,
            "gold_text": gold,
            "prediction_text": prediction,
            "output_steps": steps,
            "subwords": [[t, s, e] for t, s, e in subwords],
            "attention": attention,
        }
        print(json.dumps(record, ensure_ascii=False, separators=(",", ":")))


if __name__ == "__main__":
    main()
