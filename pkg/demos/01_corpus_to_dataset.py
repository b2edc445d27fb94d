"""From CoNLL-U text to a labeled probing dataset.

Walks the corpus stage end to end: parse annotated sentences, derive the
8-class inflection labels, filter to alphabetic word forms, then cut a
stratified 70/10/20 split and draw type-consistent control labels.
"""

from layerprobe.corpus import (
    build_dataset,
    dataset_statistics,
    gen_control_labels,
    parse_conllu,
    stratified_split,
)

CONLLU = """\
# sent_id = demo-1
1\tThe\tthe\tDET\tDT\tDefinite=Def|PronType=Art\t2\tdet\t_\t_
2\tcats\tcat\tNOUN\tNNS\tNumber=Plur\t3\tnsubj\t_\t_
3\twalked\twalk\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\t_
4\thome\thome\tNOUN\tNN\tNumber=Sing\t3\tobl\t_\t_

# sent_id = demo-2
1\tdogs\tdog\tNOUN\tNNS\tNumber=Plur\t2\tnsubj\t_\t_
2\tslept\tsleep\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\t_
3\tlonger\tlong\tADJ\tJJR\tDegree=Cmp\t2\tadvcl\t_\t_

# sent_id = demo-3
1\tbirds\tbird\tNOUN\tNNS\tNumber=Plur\t2\tnsubj\t_\t_
2\tsang\tsing\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\t_
3\tsongs\tsong\tNOUN\tNNS\tNumber=Plur\t2\tobj\t_\t_

# sent_id = demo-4
1\tA\ta\tDET\tDT\tDefinite=Ind|PronType=Art\t3\tdet\t_\t_
2\tfaster\tfast\tADJ\tJJR\tDegree=Cmp\t3\tamod\t_\t_
3\thorse\thorse\tNOUN\tNN\tNumber=Sing\t4\tnsubj\t_\t_
4\twon\twin\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\t_
5\tagain\tagain\tADV\tRB\t_\t4\tadvmod\t_\t_

# sent_id = demo-5
1\tthe\tthe\tDET\tDT\tDefinite=Def|PronType=Art\t3\tdet\t_\t_
2\tquicker\tquick\tADJ\tJJR\tDegree=Cmp\t3\tamod\t_\t_
3\tpath\tpath\tNOUN\tNN\tNumber=Sing\t4\tnsubj\t_\t_
4\thelped\thelp\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\t_
5\ta\ta\tDET\tDT\tDefinite=Ind|PronType=Art\t6\tdet\t_\t_
6\trunner\trunner\tNOUN\tNN\tNumber=Sing\t4\tobj\t_\t_
"""

sentences = parse_conllu(CONLLU)
print(f"parsed {len(sentences)} sentences")

data = build_dataset(sentences)
print(f"built {len(data)} data points (labelable nouns/verbs/adjectives):")
for dp in data:
    print(f"  [{dp.uid}] {dp.form!r:12} lemma={dp.lemma!r:8} {dp.inflection.value:12} ({dp.pos.value})")

stats = dataset_statistics(data)
print("\ninflection shares:")
for label, share in stats["inflection_shares"].items():
    print(f"  {label:12} {share:.0%}")

# Stratified split: each class keeps ~70/10/20 proportions (+-1 example).
split = stratified_split(data, seed=0)
print("\nsplit assignment:", dict(sorted(split.assignment.items())))

# Control labels: every word type draws one label from the real label
# distribution, the same label at every occurrence.
control = gen_control_labels(data, task="inflection", seed=0)
print("\ncontrol labels by word type:")
for word, label in sorted(control.mapping.items()):
    print(f"  {word:10} -> {control.classes[label]}")
