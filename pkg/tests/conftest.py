import numpy as np
import pytest

from layerprobe.corpus import build_dataset, parse_conllu

# Small GUM-style fragment: comments, a multiword-token range, an empty node,
# FEATS variety, and tokens the alphabetic+apostrophe filter must reject.
SAMPLE_CONLLU = """\
# newdoc id = doc1
# sent_id = doc1-1
# text = The cats walked home .
1\tThe\tthe\tDET\tDT\tDefinite=Def|PronType=Art\t2\tdet\t_\t_
2\tcats\tcat\tNOUN\tNNS\tNumber=Plur\t3\tnsubj\t_\t_
3\twalked\twalk\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\t_
4\thome\thome\tNOUN\tNN\tNumber=Sing\t3\tobl\t_\t_
5\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_

# sent_id = doc1-2
1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_
1\tdo\tdo\tAUX\tVBP\tMood=Ind|Tense=Pres|VerbForm=Fin\t3\taux\t_\t_
2\tn't\tnot\tPART\tRB\t_\t3\tadvmod\t_\t_
3\twalk\twalk\tVERB\tVB\tVerbForm=Inf\t0\troot\t_\t_
3.1\twalks\twalk\tVERB\tVBZ\t_\t_\t_\t_\t_
4\tfaster\tfast\tADJ\tJJR\tDegree=Cmp\t3\tadvcl\t_\t_

# sent_id = doc1-3
1\tShe\tshe\tPRON\tPRP\tCase=Nom|Gender=Fem|Number=Sing|Person=3|PronType=Prs\t2\tnsubj\t_\t_
2\twalks\twalk\tVERB\tVBZ\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t0\troot\t_\t_
3\tthe\tthe\tDET\tDT\tDefinite=Def|PronType=Art\t5\tdet\t_\t_
4\thappiest\thappy\tADJ\tJJS\tDegree=Sup\t5\tamod\t_\t_
5\tdog\tdog\tNOUN\tNN\tNumber=Sing\t2\tobj\t_\t_
6\tin\tin\tADP\tIN\t_\t8\tcase\t_\t_
7\tthe\tthe\tDET\tDT\tDefinite=Def|PronType=Art\t8\tdet\t_\t_
8\tU.S.\tU.S.\tNOUN\tNN\tNumber=Sing\t5\tnmod\t_\t_

# sent_id = doc1-4
1\tIt\tit\tPRON\tPRP\tCase=Nom|Gender=Neut|Number=Sing|Person=3|PronType=Prs\t2\tnsubj\t_\t_
2\t’twas\t'twas\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\t_
3\ta\ta\tDET\tDT\tDefinite=Ind|PronType=Art\t5\tdet\t_\t_
4\tgood\tgood\tADJ\tJJ\tDegree=Pos\t5\tamod\t_\t_
5\tday\tday\tNOUN\tNN\tNumber=Sing\t2\tobj\t_\t_
"""


@pytest.fixture(scope="session")
def sample_sentences():
    return parse_conllu(SAMPLE_CONLLU)


@pytest.fixture(scope="session")
def sample_dataset(sample_sentences):
    return build_dataset(sample_sentences)


def make_blobs(centers, n_per, noise, seed, d=None):
    """Gaussian clusters around the given centers, one class per center row
    unless labels are supplied via (center, label) pairs."""
    rng = np.random.default_rng(seed)
    X, y = [], []
    for center, label in centers:
        center = np.asarray(center, dtype=np.float64)
        pts = center + noise * rng.standard_normal((n_per, len(center)))
        X.append(pts)
        y.extend([label] * n_per)
    return np.vstack(X), np.array(y)


@pytest.fixture(scope="session")
def xor_suite():
    """Four clusters at (+-1, +-1): class = sign parity, not linearly
    separable, cleanly separable by a bias-free two-layer ReLU net."""
    centers = [((1, 1), 0), ((-1, -1), 0), ((1, -1), 1), ((-1, 1), 1)]
    X_train, y_train = make_blobs(centers, n_per=100, noise=0.2, seed=7)
    X_test, y_test = make_blobs(centers, n_per=50, noise=0.2, seed=8)
    return X_train, y_train, X_test, y_test


@pytest.fixture(scope="session")
def linear_suite():
    """Two well-separated blobs in 4-D: linearly separable by a margin."""
    centers = [((2, 0, 1, -1), 0), ((-2, 1, -1, 1), 1)]
    X_train, y_train = make_blobs(centers, n_per=100, noise=0.3, seed=11)
    X_test, y_test = make_blobs(centers, n_per=50, noise=0.3, seed=12)
    return X_train, y_train, X_test, y_test
