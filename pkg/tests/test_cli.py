import json
from pathlib import Path

import pytest

from gdrates.__main__ import (
    EXIT_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    GlobalArguments,
    ThresholdsArguments,
    parse_args,
    run,
)
from gdrates.output import OutputFormat


def _records(capsys: pytest.CaptureFixture[str]) -> list[dict[str, object]]:
    return json.loads(capsys.readouterr().out)


def test_parse_args() -> None:
    options, args = parse_args(
        ['-vv', 'thresholds', '--kappa=-0.5', '--kmax', '3', '--csv'],
    )
    assert options == GlobalArguments(verbosity=2)
    assert isinstance(args, ThresholdsArguments)
    assert args.k_max == 3
    assert args.kappa == -0.5
    assert args.output.format is OutputFormat.CSV


def test_unknown_command_exits() -> None:
    with pytest.raises(SystemExit):
        run(['bogus'])


def test_rate_constant(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(['rate', '-k', '0', '--gl', '1', '-n', '10', '--json']) == 0
    (record,) = _records(capsys)
    assert record['denominator'] == pytest.approx(21.0)
    assert record['regime'] == 'sublinear'
    assert record['numerator'] == 'gap_to_fstar'
    assert record['bound'] == pytest.approx(1.0 / 21.0)


def test_rate_to_fn(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ['rate', '-k', '0', '--gl', '1', '-n', '10', '--to-fn', '--json']
    assert run([*argv, '--gap', '2']) == EXIT_OK
    (record,) = _records(capsys)
    assert record['denominator'] == pytest.approx(20.0)
    assert record['numerator'] == 'gap_to_fN'
    assert record['bound'] == pytest.approx(0.1)


def test_rate_dynamic(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(['rate', '-k', '0', '--dynamic', '-n', '10', '--json']) == 0
    (record,) = _records(capsys)
    assert record['gl'] == 'dynamic'
    assert record['denominator'] == pytest.approx(37.933, abs=2e-3)
    assert record['step_gain_sum'] == pytest.approx(
        record['denominator'],
        rel=1e-9,
    )


def test_rate_dynamic_long_nonconvex_run(
    capsys: pytest.CaptureFixture[str],
) -> None:
    argv = ['rate', '--kappa=-0.5', '--dynamic', '-n', '40', '--json']
    assert run(argv) == EXIT_OK
    (record,) = _records(capsys)
    assert record['denominator'] > 40.0
    assert record['step_gain_sum'] == pytest.approx(
        record['denominator'],
        rel=1e-9,
    )


def test_schedule_stalling_sequence_fails() -> None:
    argv = ['schedule', '--kappa', '0.5', '-n', '40']
    assert run(argv) == EXIT_FAILED


def test_rate_schedule_file(
    capsys: pytest.CaptureFixture[str],
    tmp_path: Path,
) -> None:
    path = tmp_path / 'steps.json'
    path.write_text('[1.0, 1.0]\n')
    argv = ['rate', '--kappa=-0.5', '--schedule', str(path), '--json']
    assert run(argv) == EXIT_OK
    (record,) = _records(capsys)
    assert record['N'] == 2
    assert record['regime'] == 'one_step'
    assert record['denominator'] == pytest.approx(13.0 / 3.0)


def test_rate_schedule_lines(
    capsys: pytest.CaptureFixture[str],
    tmp_path: Path,
) -> None:
    path = tmp_path / 'steps.txt'
    path.write_text('1.0\n1.0\n')
    argv = ['rate', '--kappa=-0.5', '--schedule', str(path), '--json']
    assert run(argv) == EXIT_OK
    (record,) = _records(capsys)
    assert record['denominator'] == pytest.approx(13.0 / 3.0)


def test_rate_rejects_bad_schedule(tmp_path: Path) -> None:
    path = tmp_path / 'steps.json'
    path.write_text('["long"]\n')
    argv = ['rate', '--kappa=-0.5', '--schedule', str(path)]
    assert run(argv) == EXIT_USAGE


def test_rate_needs_n() -> None:
    assert run(['rate', '-k', '0', '--gl', '1']) == EXIT_USAGE


def test_rate_rejects_step_range() -> None:
    assert run(['rate', '-k', '0', '--gl', '2.5', '-n', '3']) == EXIT_USAGE


def test_thresholds_csv(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ['thresholds', '--kappa=-0.5', '--kmax', '3', '--csv']
    assert run([*argv, '--digits', '4']) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'k,gamma_bar_k'
    assert [line.split(',')[0] for line in lines[1:]] == ['1', '2', '3']


def test_opt_step_nonconvex(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(['opt-step', '--kappa=-1', '-n', '2', '--json']) == EXIT_OK
    values = {r['name']: r['value'] for r in _records(capsys)}
    assert values['gamma_star'] == pytest.approx(2.0 / 3.0**0.5)
    assert values['gamma_star_is_n_independent'] == 1.0
    assert 'gl_optimal_N' in values


def test_opt_step_convex(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(['opt-step', '-k', '0', '-n', '1', '--json']) == EXIT_OK
    (record,) = _records(capsys)
    assert record['name'] == 'gamma_bar_N'
    assert record['value'] == pytest.approx(1.5)


def test_opt_step_convex_needs_n() -> None:
    assert run(['opt-step', '-k', '0']) == EXIT_USAGE


@pytest.mark.parametrize('truncate', [False, True])
def test_schedule(capsys: pytest.CaptureFixture[str], truncate: bool) -> None:
    argv = ['schedule', '--kappa=-0.5', '-n', '4', '--json']
    if truncate:
        argv.append('--truncate')
    assert run(argv) == EXIT_OK
    records = _records(capsys)
    assert [r['i'] for r in records] == [0, 1, 2, 3]
    for record in records:
        assert 0.0 < record['gl'] < 2.0


def test_worstcase_to_stdout(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(['worstcase', '-k', '0', '--gl', '0.5', '-n', '3']) == EXIT_OK
    instance = json.loads(capsys.readouterr().out)
    assert instance['payload']['kind'] == 'huber'
    assert instance['schedule']['entries'] == [0.5, 0.5, 0.5]


def _write_mid_instance(path: Path) -> None:
    argv = ['worstcase', '--kappa=-0.5', '--gl', '1.3', '-n', '3']
    assert run([*argv, '-o', str(path), '--json']) == EXIT_OK


def test_worstcase_simulate_verify(
    capsys: pytest.CaptureFixture[str],
    tmp_path: Path,
) -> None:
    path = tmp_path / 'mid.json'
    _write_mid_instance(path)
    (written,) = _records(capsys)
    assert written['kind'] == 'triplets'
    assert written['status'] == 'PASS'

    assert run(['simulate', '-i', str(path), '--json']) == EXIT_OK
    (report,) = _records(capsys)
    assert report['status'] == 'PASS'
    assert report['ratio'] == pytest.approx(1.0, abs=1e-9)

    assert run(['verify', '-t', str(path), '--mu=-0.5', '--json']) == 0
    (verdict,) = _records(capsys)
    assert verdict['triplets'] == 4
    assert verdict['status'] == 'PASS'


def test_simulate_flags_a_corrupted_instance(
    capsys: pytest.CaptureFixture[str],
    tmp_path: Path,
) -> None:
    path = tmp_path / 'mid.json'
    _write_mid_instance(path)
    capsys.readouterr()
    data = json.loads(path.read_text())
    data['payload']['triplets'][-1]['f'] += 1.0
    path.write_text(json.dumps(data))
    assert run(['simulate', '-i', str(path), '--json']) == EXIT_FAILED
    (report,) = _records(capsys)
    assert report['status'] == 'FAIL'
    assert report['interpolable'] == 'False'


def test_verify_rejects_function_instances(tmp_path: Path) -> None:
    path = tmp_path / 'short.json'
    argv = ['worstcase', '--kappa=-0.5', '--gl', '0.7', '-n', '4']
    assert run([*argv, '-o', str(path)]) == EXIT_OK
    assert run(['verify', '-t', str(path), '--mu=-0.5']) == EXIT_USAGE


def test_verify_missing_file(tmp_path: Path) -> None:
    path = tmp_path / 'absent.json'
    assert run(['verify', '-t', str(path), '--mu=-0.5']) == EXIT_USAGE


def test_tables(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(['tables', '-w', '1', '--json']) == EXIT_OK
    records = _records(capsys)
    row = next(r for r in records if r['N'] == 10)
    assert row['denom_standard'] == pytest.approx(21.0)
    assert row['denom_optimal'] == pytest.approx(37.681, abs=2e-3)


def test_tables_strongly_convex_keeps_four_digits(
    capsys: pytest.CaptureFixture[str],
) -> None:
    assert run(['tables', '-w', '2', '--csv']) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith('kappa,N,gl_standard,')
    rows = [line.split(',') for line in lines[1:]]
    assert rows[0][:3] == ['0.0010', '1', '1.9980']
    assert ['0.0001', '1', '1.9998'] in [row[:3] for row in rows]


def test_tables_nonconvex_long_runs(
    capsys: pytest.CaptureFixture[str],
) -> None:
    assert run(['tables', '-w', '3', '--json']) == EXIT_OK
    records = _records(capsys)
    assert [r['N'] for r in records][-1] == 100
    row = records[-1]
    assert row['denom_optimal'] == pytest.approx(373.255, abs=6e-4)
    assert row['denom_dynamic'] == pytest.approx(375.841, abs=6e-4)


def test_figdata_to_file(tmp_path: Path) -> None:
    path = tmp_path / 'p_term.csv'
    argv = ['figdata', '-w', 'p-term', '--digits', '6', '-o', str(path)]
    assert run(argv) == EXIT_OK
    lines = path.read_text().splitlines()
    assert lines[0] == 'kappa,gl,gl_p,gamma_bar_1'
    assert len(lines) == 1 + 5 * 200


@pytest.mark.parametrize(
    'which, field',
    [('sweep', 'kappas'), ('instance', 'payload')],
)
def test_json_schema(
    capsys: pytest.CaptureFixture[str],
    which: str,
    field: str,
) -> None:
    assert run(['json-schema', which]) == EXIT_OK
    schema = json.loads(capsys.readouterr().out)
    assert field in schema['properties']


def test_sweep(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    path = tmp_path / 'sweep.yaml'
    path.write_text(
        'kappas: [0.2, 0.0, -0.5]\n'
        'gls: [0.5, 1.3]\n'
        'ns: [2, 3]\n'
        'gap: 0.5\n',
    )
    assert run(['sweep', '-s', str(path), '--json']) == EXIT_OK
    records = _records(capsys)
    assert len(records) == 12
    assert {r['status'] for r in records} == {'PASS'}


def test_sweep_skips_steps_outside_the_range(
    capsys: pytest.CaptureFixture[str],
    tmp_path: Path,
) -> None:
    path = tmp_path / 'sweep.yaml'
    path.write_text('kappas: [0.5, -0.5]\ngls: [0.5, 1.95]\nns: [2]\n')
    assert run(['sweep', '-s', str(path), '--json']) == EXIT_OK
    records = _records(capsys)
    # 1.95 is beyond 2/(1+kappa) at kappa = 0.5 only
    assert len(records) == 3
    assert {r['status'] for r in records} == {'PASS'}


def test_sweep_rejects_unknown_keys(tmp_path: Path) -> None:
    path = tmp_path / 'sweep.yaml'
    path.write_text('kappas: [0.0]\ngls: [1.0]\nns: [1]\nsteps: 3\n')
    assert run(['sweep', '-s', str(path)]) == EXIT_USAGE
