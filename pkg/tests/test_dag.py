import logging

import param
import pytest

from ctrlq import Block, BlockError, BlockState, BlockValidateError, Dag, DagTrace


class PassThrough(Block):
    """Pass a value through unchanged."""

    in_p = param.Integer(default=0)
    out_p = param.Integer(default=0)

    def execute(self):
        self.out_p = self.in_p


class Add(Block):
    """Add an addend to the input."""

    in_a = param.Integer()
    out_a = param.Integer()

    def __init__(self, addend: int, **kwargs):
        super().__init__(**kwargs)
        self.addend = addend

    def execute(self):
        self.out_a = self.in_a + self.addend


class Recorder(Block):
    """Record the execution order."""

    in_p = param.Integer(default=0)
    out_p = param.Integer(default=0)

    def __init__(self, *args, recorder, **kwargs):
        super().__init__(*args, **kwargs)
        self.recorder = recorder

    def execute(self):
        self.recorder.append(self.name)
        self.out_p = self.in_p


def test_empty_dag(Dag_f):
    dag = Dag_f([])
    with pytest.raises(BlockError, match='Nothing to execute'):
        dag.execute()


def test_simple(Dag_f):
    """A value flows from the head block, through the dag, to the last block."""

    p = PassThrough()
    a = Add(1)
    o = PassThrough()

    dag = Dag_f([
        (p.param.out_p, a.param.in_a),
        (a.param.out_a, o.param.in_p),
    ])

    p.in_p = 1
    dag.execute()
    assert a.in_a == 1
    assert o.in_p == 2
    assert o.out_p == 2


def test_onlychanged(Dag_f):
    """Params are passed on even when set to the same value."""

    p = PassThrough()
    a = Add(1)
    dag = Dag_f([(p.param.out_p, a.param.in_a)])

    dag.execute()
    assert a.in_a == 0
    assert a.out_a == 1


def test_mismatched_types(Dag_f):
    """A value that does not fit the destination param raises a BlockError."""

    class OneOut(Block):
        """One output parameter."""

        out_o = param.String()

        def execute(self):
            self.out_o = 'out'

    class OneIn(Block):
        """One input parameter."""

        in_o = param.Integer()

    dag = Dag_f([(OneOut().param.out_o, OneIn().param.in_o)])

    with pytest.raises(BlockError, match='setting a parameter'):
        dag.execute()


def test_block_exception_is_chained(Dag_f):
    """Exceptions in a block raise a BlockError whose cause is the original exception."""

    class Fails(Block):
        """Always fail."""

        in_p = param.Integer()

        def execute(self):
            raise ValueError('This is an exception')

    p = PassThrough()
    f = Fails()
    dag = Dag_f([(p.param.out_p, f.param.in_p)])

    with pytest.raises(BlockError, match='This is an exception') as exc:
        dag.execute()

    assert isinstance(exc.value.__cause__, ValueError)
    assert f._block_state == BlockState.ERROR
    assert p._block_state == BlockState.SUCCESSFUL


def test_validation_error_passes_through(Dag_f):
    class Validates(Block):
        """Reject odd input."""

        in_p = param.Integer(default=0)
        out_p = param.Integer(default=0)

        def prepare(self):
            if self.in_p % 2:
                raise BlockValidateError(block_name=self.name, message='odd input')

        def execute(self):
            self.out_p = self.in_p

    p0 = PassThrough()
    p1 = Validates()
    p2 = PassThrough()
    dag = Dag_f([
        (p0.param.out_p, p1.param.in_p),
        (p1.param.out_p, p2.param.in_p),
    ])

    p0.in_p = 1
    with pytest.raises(BlockValidateError, match='odd input') as exc:
        dag.execute()

    assert exc.value.block_name == p1.name
    assert p2.in_p == 0

    p0.in_p = 2
    dag.execute()
    assert p2.out_p == 2


def test_cannot_connect_twice(Dag_f):
    p0 = PassThrough()
    p1 = PassThrough()

    with pytest.raises(BlockError, match='at index 1 are already connected'):
        Dag_f([
            (p0.param.out_p, p1.param.in_p),
            (p0.param.out_p, p1.param.in_p),
        ])


def test_not_same_names(Dag_f):
    p0 = PassThrough(name='This')
    p1 = PassThrough(name='This')

    with pytest.raises(BlockError, match='same name at index 0'):
        Dag_f([(p0.param.out_p, p1.param.in_p)])


def test_not_existing_name(Dag_f):
    p0 = PassThrough(name='This')
    p1 = PassThrough(name='That')
    p2 = PassThrough(name='This')

    with pytest.raises(BlockError, match='at index 1 duplicates an existing name'):
        Dag_f([
            (p0.param.out_p, p1.param.in_p),
            (p1.param.out_p, p2.param.in_p),
        ])


def test_loop(Dag_f):
    p0 = PassThrough()
    p1 = PassThrough()
    p2 = PassThrough()

    with pytest.raises(BlockError, match='at index 2 would create a cycle'):
        Dag_f([
            (p0.param.out_p, p1.param.in_p),
            (p1.param.out_p, p2.param.in_p),
            (p2.param.out_p, p0.param.in_p),
        ])


def test_must_connect(Dag_f):
    p0 = PassThrough()
    p1 = PassThrough()
    p2 = PassThrough()
    p3 = PassThrough()

    with pytest.raises(BlockError, match='not connected'):
        Dag_f([
            (p0.param.out_p, p1.param.in_p),
            (p2.param.out_p, p3.param.in_p),
        ])


def test_bad_connections(Dag_f):
    p0 = PassThrough()
    p1 = PassThrough()

    with pytest.raises(BlockError, match='2-tuples'):
        Dag_f([p0.param.out_p])

    with pytest.raises(BlockError, match='must start with "out_"'):
        Dag_f([(p0.param.in_p, p1.param.in_p)])

    with pytest.raises(BlockError, match='must start with "in_"'):
        Dag_f([(p0.param.out_p, p1.param.out_p)])

    with pytest.raises(BlockError, match='not a param'):
        Dag_f([(p0, p1.param.in_p)])

    with pytest.raises(BlockError, match=r'at index 0\?'):
        Dag_f([(p0.param.out_p, PassThrough.param.in_p)])


def test_watched(Dag_f):
    """A block already wired into one dag cannot be wired into another."""

    a = PassThrough()
    b = PassThrough()
    Dag_f([(a.param.out_p, b.param.in_p)])

    with pytest.raises(BlockError, match='at index 0 has watchers'):
        Dag_f([(a.param.out_p, b.param.in_p)])

    with pytest.raises(BlockError, match='at index 0 has watchers'):
        Dag_f([(b.param.out_p, a.param.in_p)])


def test_branch_order(Dag_f):
    """Blocks with the same parent execute in the order in which they were listed."""

    recorder = []
    head = Recorder(recorder=recorder, name='head')
    a = Recorder(recorder=recorder, name='a')
    b = Recorder(recorder=recorder, name='b')

    dag = Dag_f([(head.param.out_p, b.param.in_p), (head.param.out_p, a.param.in_p)])
    dag.execute()

    assert recorder == ['head', 'b', 'a']


def test_head_listed_last(Dag_f):
    recorder = []
    head = Recorder(recorder=recorder, name='head')
    a = Recorder(recorder=recorder, name='a')
    b = Recorder(recorder=recorder, name='b')

    dag = Dag_f([(a.param.out_p, b.param.in_p), (head.param.out_p, a.param.in_p)])
    dag.execute()

    assert recorder == ['head', 'a', 'b']
    assert dag.heads_and_tails() == ({head}, {b})


def test_two_heads_join(Dag_f):
    """A block fed by two heads executes once, after both."""

    class Sum(Block):
        """Add two inputs."""

        in_x = param.Integer(default=0)
        in_y = param.Integer(default=0)
        out_s = param.Integer(default=0)

        def __init__(self, **kwargs):
            super().__init__(**kwargs)
            self.calls = 0

        def execute(self):
            self.calls += 1
            self.out_s = self.in_x + self.in_y

    x = PassThrough(name='x')
    y = PassThrough(name='y')
    s = Sum(name='s')
    dag = Dag_f([(x.param.out_p, s.param.in_x), (y.param.out_p, s.param.in_y)])

    x.in_p = 2
    y.in_p = 3
    dag.execute()

    assert s.calls == 1
    assert s.out_s == 5


def test_trace(caplog):
    p0 = PassThrough(name='p0')
    p1 = PassThrough(name='p1')
    dag = Dag([(p0.param.out_p, p1.param.in_p)], title='traced', doc='trace', trace=DagTrace.QUEUE | DagTrace.INPUTS)

    with caplog.at_level(logging.DEBUG, logger='ctrlq'):
        dag.execute()

    assert 'Block queue: ' in caplog.text
    assert 'Block p1 input values: in_p' in caplog.text


def test_no_trace_by_default(Dag_f, caplog):
    p0 = PassThrough(name='p0')
    p1 = PassThrough(name='p1')
    dag = Dag_f([(p0.param.out_p, p1.param.in_p)])

    with caplog.at_level(logging.DEBUG, logger='ctrlq'):
        dag.execute()

    assert 'Block queue' not in caplog.text
