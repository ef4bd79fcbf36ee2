"""Two-arm bandit re-simulation, written independently of the C++ scheduler.

Prints the better arm's share of units over rounds 10-40 for 10 seeds under
three readings of the pull count and reward.
"""
import math, random
def run(seed, variant, rounds=40, units=6):
    rng = random.Random(seed)
    g = {'good':0.0,'poor':0.0}; t={'good':0.0,'poor':0.0}; N=0.0
    good=tot=0
    for r in range(1,rounds+1):
        N += sum(t.values())
        unpr=[f for f in sorted(g) if t[f]==0]
        cand=[f for f in sorted(g) if t[f]>0]
        ln = math.log(N) if N>=1 else 0
        sc={f: g[f]/(g[f]+t[f]) + math.sqrt(2*ln/t[f]) for f in cand}
        asg=[]
        for u in range(units):
            if u < len(unpr): asg.append(unpr[u])
            elif cand:
                m=max(sc.values()); w={f:math.exp(sc[f]-m) for f in cand}; s=sum(w.values())
                x=rng.random(); acc=0; pick=cand[-1]
                for f in cand:
                    acc+=w[f]/s
                    if x<acc: pick=f;break
                asg.append(pick)
            else: asg.append(unpr[u%len(unpr)])
        held={f:asg.count(f) for f in set(asg)}
        for f,h in held.items():
            rew = (1.0 if f=='good' else 0.1)
            if variant=='per_unit': rew*=h
            g[f]+=rew
            t[f]= 1.0 if variant=='t1' else h
        if r>=10: good+=held.get('good',0); tot+=units
    return good/tot
for v in ['base','t1','per_unit']:
    sh=[run(s,v) for s in range(1,11)]
    print(v, ' '.join('%.2f'%x for x in sh), sum(x>0.6 for x in sh))
print('long horizon base', sum(run(s,'base',400) for s in range(10))/10)
