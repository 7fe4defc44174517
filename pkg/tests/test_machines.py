"""Tests de máquinas libres de prefijos, dovetailing y búsqueda acotada."""
from fractions import Fraction

import pytest
from hypothesis import given, settings

from models.schemas import SyntheticDomainSpec
from services.machine_service import (
    Execution,
    InterpreterMachine,
    PrefixTrie,
    SyntheticMachine,
    TableMachine,
    complexity_exact,
    complexity_profile,
    decode_program,
    kraft_sum,
    load_snapshot,
    make_table_machine,
    pair,
    program_at,
    save_snapshot,
    step_enumeration,
    unpair,
)
from services.sequence_service import PeriodicSource
from tests.strategies import all_strings, prefix_free_tables
from utils.errors import PrefixViolationError, SnapshotError, UnrealizableSpecError


class TestPrefixTrie:
    def test_detects_both_directions(self):
        trie = PrefixTrie()
        trie.insert("01")
        with pytest.raises(PrefixViolationError) as excinfo:
            trie.insert("011")
        assert excinfo.value.program == "01"
        with pytest.raises(PrefixViolationError):
            trie.insert("0")
        assert "01" in trie and "0" not in trie

    def test_duplicate_is_violation(self):
        trie = PrefixTrie()
        trie.insert("1")
        with pytest.raises(PrefixViolationError):
            trie.insert("1")


class TestTableMachine:
    def test_kraft_of_small_table(self):
        machine = make_table_machine([("1", ""), ("01", "1")])
        assert machine.kraft_sum() == Fraction(3, 4)
        assert machine.exhausted

    def test_empty_table(self):
        machine = make_table_machine([])
        assert kraft_sum(machine) == 0
        assert machine.enumerated_count == 0

    def test_prefix_violation_names_pair(self):
        with pytest.raises(PrefixViolationError) as excinfo:
            make_table_machine([("0", ""), ("01", "1")])
        assert {excinfo.value.program, excinfo.value.other} == {"0", "01"}

    def test_staged_enumeration(self):
        machine = TableMachine([("1", ""), ("01", "1"), ("001", "1")])
        assert machine.stage == 0 and machine.kraft_sum() == 0
        step_enumeration(machine, 2)
        assert machine.enumerated_count == 2
        step_enumeration(machine, 100)
        assert machine.enumerated_count == 3 and machine.stage == 3

    def test_negative_steps(self):
        with pytest.raises(ValueError):
            make_table_machine([]).step_enumeration(-1)

    @settings(max_examples=50)
    @given(prefix_free_tables())
    def test_random_tables_respect_kraft(self, table):
        machine = make_table_machine(table)
        assert machine.kraft_sum() <= 1
        assert machine.enumerated_count == len(table)


class TestInterpreter:
    def test_decode(self):
        assert decode_program("0") == ()
        assert decode_program("11011") == (3,)
        assert decode_program("1110011") == (1,)
        assert decode_program("111100011") == (0, 3)
        assert decode_program("10") is None
        assert decode_program("110") is None

    def test_program_indexing(self):
        assert [program_at(i) for i in range(4)] == ["0", "100", "101", "11000"]

    def test_cantor_pairing(self):
        for s in range(200):
            assert pair(*unpair(s)) == s

    def test_halt_semantics(self):
        # push0, halt: halt con 0 en el tope lo saca y sigue; vuelve a push0...
        looping = Execution((0, 3))
        for _ in range(50):
            looping.step()
        assert not looping.halted
        # push1, emit, halt: emite 1 y para con la pila vacía
        emitting = Execution((1, 2, 3))
        while not emitting.step():
            pass
        assert emitting.result == "1" and emitting.steps == 3

    def test_empty_payload_halts_immediately(self):
        machine = InterpreterMachine()
        assert machine.run("0", budget=1) == ""

    def test_budget_cuts_search(self):
        machine = InterpreterMachine()
        assert machine.run("111100011", budget=100) is None

    def test_steps_zero_is_identity(self):
        machine = InterpreterMachine()
        machine.step_enumeration(0)
        assert machine.stage == 0 and machine.enumerated_count == 0

    def test_enumeration_grows_monotonically(self):
        small = {p.program for p in InterpreterMachine().step_enumeration(10_000).halting_pairs()}
        large = InterpreterMachine().step_enumeration(100_000)
        assert small <= {p.program for p in large.halting_pairs()}
        assert large.kraft_sum() <= 1

    def test_enumeration_is_deterministic(self):
        first = InterpreterMachine().step_enumeration(5_000)
        second = InterpreterMachine().step_enumeration(2_000).step_enumeration(3_000)
        assert list(first.halting_pairs()) == list(second.halting_pairs())


class TestSynthetic:
    def test_counts_realised(self):
        machine = SyntheticMachine(SyntheticDomainSpec(counts={1: 1, 3: 2}, max_len=3))
        programs = list(machine.candidate_programs(3))
        assert programs == ["0", "100", "101"]
        assert machine.kraft_sum() == Fraction(1, 2) + Fraction(2, 8)
        assert machine.run("101", 1) == "" and machine.run("110", 1) is None

    def test_unrealizable_names_length(self):
        with pytest.raises(UnrealizableSpecError) as excinfo:
            SyntheticMachine(SyntheticDomainSpec(counts={1: 2, 2: 1}, max_len=2))
        assert excinfo.value.length == 2


class TestComplexity:
    def test_singleton_domain(self):
        machine = make_table_machine([("1", "")])
        report = complexity_exact(machine, "", cap=8, budget=1)
        assert report.h_value == 1 and report.witness == "1"
        assert not complexity_exact(machine, "0", cap=8, budget=1).found

    def test_shortest_program_wins(self):
        machine = make_table_machine([("1", ""), ("01", "1"), ("001", "1")])
        report = complexity_exact(machine, "1", cap=8, budget=1)
        assert (report.h_value, report.witness) == (2, "01")

    def test_cap_limit(self):
        with pytest.raises(ValueError):
            complexity_exact(make_table_machine([]), "", cap=1000, budget=1)

    def test_interpreter_emits(self):
        machine = InterpreterMachine()
        report = complexity_exact(machine, "1", cap=13, budget=64)
        assert report.h_value == 13
        assert machine.run(report.witness, 64) == "1"

    @settings(max_examples=30)
    @given(prefix_free_tables(max_entries=20, max_len=12))
    def test_matches_exhaustive_enumeration(self, table):
        machine = make_table_machine(table)
        outputs = dict(table)
        shortest = {}
        for p in all_strings(12):
            if p in outputs:
                shortest.setdefault(outputs[p], len(p))
        for target in set(outputs.values()) | {"", "0", "1"}:
            assert complexity_exact(machine, target, cap=12, budget=1).h_value == shortest.get(target)

    def test_profile_rows(self):
        machine = make_table_machine([("1", ""), ("01", "1"), ("001", "11")])
        rows = complexity_profile(machine, PeriodicSource("1"), 3, Fraction(1, 2), cap=6, budget=1)
        assert [row.h_upper for row in rows] == [1, 2, 3, None]
        assert rows[2].t_n == 1


class TestSnapshots:
    def test_table_round_trip(self, tmp_path):
        machine = make_table_machine([("1", ""), ("01", "1")])
        path = tmp_path / "table.snapshot"
        save_snapshot(machine, path)
        loaded = load_snapshot(path)
        assert loaded.machine_id == machine.machine_id
        assert loaded.kraft_sum() == Fraction(3, 4)

    def test_interpreter_replay(self, tmp_path):
        machine = InterpreterMachine().step_enumeration(10_000)
        path = tmp_path / "interp.snapshot"
        save_snapshot(machine, path)
        loaded = load_snapshot(path)
        assert loaded.stage == machine.stage
        assert list(loaded.halting_pairs()) == list(machine.halting_pairs())

    def test_tampered_interpreter_snapshot(self, tmp_path):
        path = tmp_path / "bad.snapshot"
        path.write_text("kind=interpreter\nstage=100\n0\t1\n")
        with pytest.raises(SnapshotError):
            load_snapshot(path)

    def test_synthetic_round_trip(self, tmp_path):
        machine = SyntheticMachine(SyntheticDomainSpec(counts={2: 3, 4: 2}, max_len=4))
        path = tmp_path / "synthetic.snapshot"
        save_snapshot(machine, path)
        assert load_snapshot(path).length_profile() == machine.length_profile()

    def test_missing_header(self, tmp_path):
        path = tmp_path / "empty.snapshot"
        path.write_text("stage=1\n")
        with pytest.raises(SnapshotError):
            load_snapshot(path)
