import { describe, expect, it } from 'vitest';

import { ScrollSampler, SignalEmitter } from '../src/signals.js';

describe('scroll sampler', () => {
    it('computes px/s over 100ms samples', () => {
        const s = new ScrollSampler();
        s.observe(0, 0);
        expect(s.observe(40, 100)).toBe(400);
        expect(s.observe(40, 200)).toBe(0); // no movement in the next sample
    });

    it('ignores sub-sample jitter', () => {
        const s = new ScrollSampler();
        s.observe(0, 0);
        s.observe(500, 50); // within the sampling interval
        expect(s.current(60)).toBe(0);
    });

    it('decays to zero when scrolling stops', () => {
        const s = new ScrollSampler();
        s.observe(0, 0);
        s.observe(100, 100);
        expect(s.current(150)).toBeGreaterThan(0);
        expect(s.current(500)).toBe(0);
    });
});

describe('signal emitter', () => {
    it('rate limits to 10 signals per second under continuous scrolling', () => {
        const e = new SignalEmitter();
        const sentAt: number[] = [];
        for (let t = 0; t <= 10_000; t += 10) {
            e.onScroll(t * 5, t);
            if (e.poll(t)) sentAt.push(t);
        }
        // No sliding 1 s window may carry more than 10 signals.
        for (let i = 0; i < sentAt.length; i += 1) {
            const inWindow = sentAt.filter((t) => t > sentAt[i] - 1_000 && t <= sentAt[i]).length;
            expect(inWindow).toBeLessThanOrEqual(10);
        }
        expect(sentAt.length).toBeGreaterThanOrEqual(90); // still responsive
    });

    it('sends nothing while idle except the 5s heartbeat', () => {
        const e = new SignalEmitter();
        const sent: number[] = [];
        for (let t = 0; t <= 16_000; t += 50) {
            if (e.poll(t)) sent.push(t);
        }
        // First poll emits the initial state, then one heartbeat per 5 s.
        expect(sent.length).toBe(4);
        for (let i = 1; i < sent.length; i += 1) {
            expect(sent[i] - sent[i - 1]).toBeGreaterThanOrEqual(5_000);
        }
    });

    it('selection produces an active signal with the row context', () => {
        const e = new SignalEmitter();
        e.poll(0);
        e.select({ sources: ['10.21.55.120'], actors: [], kinds: [] }, 200);
        const sig = e.poll(200);
        expect(sig).not.toBeNull();
        expect(sig!.selection_active).toBe(true);
        expect(sig!.selection.sources).toEqual(['10.21.55.120']);
    });

    it('clearing selection emits an inactive signal', () => {
        const e = new SignalEmitter();
        e.select({ sources: ['x'], actors: [], kinds: [] }, 0);
        e.poll(0);
        e.clearSelection();
        const sig = e.poll(200);
        expect(sig).not.toBeNull();
        expect(sig!.selection_active).toBe(false);
        expect(sig!.selection.sources).toEqual([]);
    });

    it('newest state wins when throttled', () => {
        const e = new SignalEmitter();
        e.poll(0);
        e.select({ sources: ['a'], actors: [], kinds: [] }, 10);
        e.select({ sources: ['b'], actors: [], kinds: [] }, 20);
        expect(e.poll(20)).toBeNull(); // throttled
        const sig = e.poll(150);
        expect(sig!.selection.sources).toEqual(['b']);
    });
});
