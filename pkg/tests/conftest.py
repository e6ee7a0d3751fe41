import pytest

from winqe.corpus import Document, SystemOutput, TestSet


def make_testset(doc_lengths, lang_pair="en-de", text="s"):
    docs = []
    for d, length in enumerate(doc_lengths):
        sentences = tuple(f"{text}{d}_{i} w{i}" for i in range(length))
        docs.append(Document(f"doc{d}", sentences))
    return TestSet(lang_pair=lang_pair, documents=tuple(docs))


def make_output(testset, name="sysA", text=None):
    hyp = []
    for doc in testset.documents:
        for i, src in enumerate(doc.src):
            hyp.append(src if text is None else f"{text}{doc.doc_id}_{i}")
    return SystemOutput(system_name=name, lang_pair=testset.lang_pair, hyp=tuple(hyp))


@pytest.fixture
def two_doc_testset():
    return make_testset([3, 5])
