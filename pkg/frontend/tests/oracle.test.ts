import { describe, expect, it } from 'vitest';

import { evaluateRequest, handleLine } from '../src/oracle';

describe('evaluateRequest', () => {
  it('reports match spans and capture indices', () => {
    const res = evaluateRequest({
      pattern: 'a(b*)c',
      flags: 'd',
      input: 'abbcd',
      lastIndex: 0,
    });
    expect(res).toEqual({
      status: 'ok',
      matched: true,
      index: 0,
      endIndex: 4,
      captures: [{ start: 1, end: 3 }],
      named: {},
    });
  });

  it('reports undefined captures as null', () => {
    const res = evaluateRequest({
      pattern: '(?:(a)|(b))*',
      flags: 'd',
      input: 'ab',
      lastIndex: 0,
    });
    expect(res).toMatchObject({
      matched: true,
      captures: [null, { start: 1, end: 2 }],
    });
  });

  it('exposes named groups', () => {
    const res = evaluateRequest({
      pattern: '(?<A>a*)(?<B>b*)\\k<A>',
      flags: '',
      input: 'aabaa',
      lastIndex: 0,
    });
    expect(res).toMatchObject({
      matched: true,
      index: 0,
      endIndex: 5,
      named: { A: { start: 0, end: 2 }, B: { start: 2, end: 3 } },
    });
  });

  it('honors lastIndex even without g or y in the request flags', () => {
    const res = evaluateRequest({ pattern: 'a', flags: '', input: 'aba', lastIndex: 1 });
    expect(res).toMatchObject({ matched: true, index: 2 });
  });

  it('respects sticky anchoring', () => {
    const res = evaluateRequest({ pattern: 'b', flags: 'y', input: 'ab', lastIndex: 0 });
    expect(res).toEqual({ status: 'ok', matched: false });
  });

  it('maps host syntax errors to error responses', () => {
    const res = evaluateRequest({ pattern: '(', flags: '', input: 'x', lastIndex: 0 });
    expect(res.status).toBe('error');
  });

  it('never adds its own interpretation of no-match', () => {
    const res = evaluateRequest({ pattern: 'z', flags: '', input: 'ab', lastIndex: 0 });
    expect(res).toEqual({ status: 'ok', matched: false });
  });
});

describe('handleLine', () => {
  it('parses a JSON request line', () => {
    const res = handleLine('{"pattern":"b","flags":"","input":"ab","lastIndex":0}');
    expect(res).toMatchObject({ status: 'ok', matched: true, index: 1, endIndex: 2 });
  });

  it('answers malformed lines with an error instead of crashing', () => {
    const res = handleLine('{not json');
    expect(res.status).toBe('error');
  });

  it('rejects non-string fields', () => {
    const res = handleLine('{"pattern":5,"input":"a"}');
    expect(res.status).toBe('error');
  });
});
