"""Print the leaf tokens of a single method as `start<TAB>end<TAB>text`.

Uses tree-sitter grammars (pip: tree-sitter, tree-sitter-java,
tree-sitter-python, tree-sitter-c-sharp). String and character literals are
collapsed to one leaf. Java/C# methods are parsed inside a dummy class.

usage: ts_leaves.py LANG FILE
"""
import sys

import tree_sitter as ts

COLLAPSE = {
    "java": {"string_literal", "character_literal"},
    "python": {"string"},
    "csharp": {
        "string_literal",
        "verbatim_string_literal",
        "raw_string_literal",
        "character_literal",
        "interpolated_string_expression",
    },
}


def language(name):
    if name == "java":
        import tree_sitter_java as m
    elif name == "python":
        import tree_sitter_python as m
    else:
        import tree_sitter_c_sharp as m
    return ts.Language(m.language())


def leaves(lang, source):
    prefix = b"" if lang == "python" else b"class _ {\n"
    suffix = b"" if lang == "python" else b"\n}\n"
    data = prefix + source + suffix
    tree = ts.Parser(language(lang)).parse(data)
    if tree.root_node.has_error:
        raise SystemExit("parse error")
    out = []

    def walk(node):
        if node.type in COLLAPSE[lang] or node.child_count == 0:
            if node.end_byte > node.start_byte:
                out.append((node.start_byte, node.end_byte))
            return
        for child in node.children:
            walk(child)

    walk(tree.root_node)
    lo, hi = len(prefix), len(prefix) + len(source)
    return [(s - lo, e - lo) for s, e in out if s >= lo and e <= hi]


def main():
    lang, path = sys.argv[1], sys.argv[2]
    source = open(path, "rb").read()
    for s, e in leaves(lang, source):
        text = source[s:e].decode("utf-8").replace("\\", "\\\\").replace("\n", "\\n").replace("\t", "\\t")
        print(f"{s}\t{e}\t{text}")


if __name__ == "__main__":
    main()
